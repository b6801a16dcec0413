"""Write plot-ready CSV data for the case-study runs.

For each treatment (healthy, R0 halved, C doubled) this writes the noisy
measured trace, the noise-free computed curve of the same scenario, and the
ARR residuals of the noisy trace under calibrated thresholds::

    python scripts/figures.py --out figures/ [--seed 42] [--sigma 0.02]
"""

import argparse
from pathlib import Path

from fdi import casestudy, io
from fdi.mb import evaluate_residuals
from fdi.model import CircuitParams, Label, NoiseSpec

NAMES = {Label.HEALTHY: "healthy", Label.R0_DOWN: "r0_down", Label.CAP_UP: "cap_up"}


def write_all(out: Path, seed: int = 42, sigma: float = casestudy.DEFAULT_SIGMA) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    params = CircuitParams.nominal()
    thr = casestudy.calibration_thresholds(params, sigma, seed)
    written = []
    for k, (label, name) in enumerate(NAMES.items()):
        measured = casestudy.treatment_trace(label, NoiseSpec(sigma, seed + k) if sigma > 0 else None)
        computed = casestudy.treatment_trace(label)
        res = evaluate_residuals(measured, params, thr)
        for suffix, text in (("measured", io.traces_to_csv([measured])),
                             ("computed", io.traces_to_csv([computed])),
                             ("residuals", io.residuals_to_csv(res))):
            path = out / f"{name}_{suffix}.csv"
            path.write_text(text)
            written.append(path)
    return written


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("figures"))
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--sigma", type=float, default=casestudy.DEFAULT_SIGMA)
    args = p.parse_args(argv)
    for path in write_all(args.out, args.seed, args.sigma):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
