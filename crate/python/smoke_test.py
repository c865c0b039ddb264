"""Smoke test for the vaeattack_py extension.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`
or `pip install ./crates/py`.
"""

import sys
import tempfile
from pathlib import Path

import vaeattack_py as va


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        va.make_synthetic("separable_gaussians", 600, 4, seed=7, path=tmp / "fixture.csv")
        ds = va.Dataset.load_csv(tmp / "fixture.csv", "label")
        print(f"loaded {ds!r}, classes {ds.class_counts()}")

        config = {
            "dataset_path": "fixture.csv",
            "attack": "evasion",
            "victim": "lr",
            "generator": "vae_wnn",
            "epochs": 40,
            "grid": {"wavelet": ["morlet", "mexican_hat"]},
        }
        for report in va.run_evasion(config, base_dir=tmp) + va.run_poison(config, base_dir=tmp):
            print(
                f"{report['generator']:8} {report['attack']:7} {report['config']['wavelet']:11} "
                f"auc {report['auc_before']:.3f} -> {report['auc_after']:.3f}"
            )

        (tmp / "grid.toml").write_text(
            'dataset_path = "fixture.csv"\nvictim = "dt"\nepochs = 20\n'
            '[grid]\nattack = ["evasion", "poison"]\ngenerator = ["vae_mlp", "cvae_mlp"]\n'
        )
        ok, failed = va.run_experiments(tmp / "grid.toml", out_dir=tmp / "out")
        print(f"grid: {ok} ok, {failed} failed")
        written = sorted(p.name for p in (tmp / "out").iterdir())
        assert written == ["run_0.json", "run_1.json", "run_2.json", "run_3.json", "summary.csv"], written
        return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
