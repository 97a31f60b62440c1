"""Print the ESR-optimal data-power fraction against the leakage correlation and transmit power.

Usage: python3 scripts/optimal_split.py [--rho 0,0.3,0.6] [--power-db 10,20,30]
"""

from __future__ import annotations

import argparse

from efas_secrecy import SystemConfig
from efas_secrecy.channel_model import db_to_linear
from efas_secrecy.secrecy_analytic import optimize_alpha


def _floats(text):
    return [float(v) for v in text.split(",") if v]


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rho", type=_floats, default=[0.0, 0.3, 0.6])
    p.add_argument("--power-db", type=_floats, default=[10.0, 20.0, 30.0])
    args = p.parse_args(argv)
    print(f"{'P_dB':>6s} {'rho':>5s} {'alpha*':>8s} {'ESR*':>8s} {'proxy':>8s}")
    for p_db in args.power_db:
        for rho in args.rho:
            opt = optimize_alpha(SystemConfig(rho=rho, P=float(db_to_linear(p_db))))
            print(f"{p_db:6.1f} {rho:5.2f} {opt.alpha_star:8.4f} {opt.esr_star:8.4f} {opt.proxy:8.4f}")


if __name__ == "__main__":
    main()
