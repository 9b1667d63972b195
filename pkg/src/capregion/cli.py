"""Command-line front end.

Machine-readable JSON goes to stdout; --pretty switches to a human table.
Exit codes: 0 success, 1 infeasible traffic, 2 invalid input (missing or
malformed files, violated bound hypotheses, bad arguments). Stochastic
commands require an explicit --seed so reports are reproducible.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

import numpy as np

from . import bounds as bounds_mod
from . import fileio
from .alignment import (
    Pairing,
    find_complementary_slot,
    ia_pair_rates,
    make_slot_sample,
    sample_quantized_phases,
    two_slot_combine,
)
from .birkhoff import birkhoff_decompose, complete_to_doubly_stochastic
from .errors import HypothesisError, InfeasibleTrafficError
from .multicast import multicast_achieved_rates, route_over_star
from .network import grid_placement, r_min, uniform_random_placement
from .rayleigh import (
    guaranteed_slot_rate,
    rayleigh_inner_rate,
    run_opportunistic,
    solve_waterfill,
)
from .traffic import membership_mc, membership_uc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capregion",
        description="Capacity-region bounds and schemes for dense wireless networks",
        epilog="CAPREGION_THREADS caps worker threads for slot simulations (default 1).",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("place", parents=[common], help="generate a node placement")
    sp.add_argument("--kind", choices=["grid", "uniform"], required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("check", parents=[common],
                        help="membership of a traffic matrix in the load region")
    sp.add_argument("--placement", required=True)
    sp.add_argument("--traffic", required=True)
    sp.add_argument("--kind", choices=["uc", "mc"], required=True)

    sp = sub.add_parser("bounds", parents=[common],
                        help="inner/outer sandwich report for a traffic matrix")
    sp.add_argument("--placement", required=True)
    sp.add_argument("--traffic", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--kind", choices=["uc", "mc"], required=True)

    sp = sub.add_parser("decompose", parents=[common],
                        help="permutation schedules for unicast traffic")
    sp.add_argument("--traffic", required=True)
    sp.add_argument("--scale-to-region", action="store_true",
                    help="scale by the maximal feasible multiple first")

    sp = sub.add_parser("route-mc", parents=[common],
                        help="two-phase star routing for multicast traffic")
    sp.add_argument("--placement", required=True)
    sp.add_argument("--traffic", required=True)
    sp.add_argument("--alpha", type=float, required=True)

    sp = sub.add_parser("ia-demo", parents=[common],
                        help="two-slot cancellation demo with quantized phases")
    sp.add_argument("--n-pairs", type=int, required=True)
    sp.add_argument("--quantization", type=int, default=4)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--horizon", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=2.0)

    sp = sub.add_parser("rayleigh", parents=[common],
                        help="opportunistic matching simulation")
    sp.add_argument("--placement", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--slots", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)

    sp = sub.add_parser("rayleigh-outer", parents=[common], help="water-filling cut bound")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--rmin", type=float, required=True)

    sp = sub.add_parser("table1", parents=[common],
                        help="per-pair rates for random pairing, n = 1e2..1e5")
    sp.add_argument("--alpha", type=float, default=4.0)

    return parser


def _emit(report: dict, pretty: bool) -> None:
    if pretty:
        for key, value in report.items():
            print(f"{key}: {value}")
    else:
        print(json.dumps(report))


def _membership_payload(report) -> dict:
    rho = report.rho_hat_star
    cut = report.binding_cut
    return {
        "member": report.member,
        "rho_hat_star": "unbounded" if math.isinf(rho) else rho,
        "binding_cut": None if cut is None else {"kind": cut.kind, "node": cut.node},
    }


def _load_traffic(path: str, kind: str):
    return fileio.load_unicast(path) if kind == "uc" else fileio.load_multicast(path)


def _check_n(placement_n: int, traffic_n: int) -> None:
    if placement_n != traffic_n:
        raise ValueError(
            f"placement has n={placement_n} but traffic has n={traffic_n}"
        )


def cmd_place(args) -> dict:
    if args.kind == "grid":
        placement = grid_placement(args.n)
    else:
        if args.seed is None:
            raise ValueError("uniform placement requires --seed (no wall-clock default)")
        placement = uniform_random_placement(args.n, args.seed)
    fileio.save_placement(placement, args.out)
    return {"written": args.out, "n": placement.n, "r_min": r_min(placement)}


def cmd_check(args) -> dict:
    placement = fileio.load_placement(args.placement)
    traffic = _load_traffic(args.traffic, args.kind)
    _check_n(placement.n, traffic.n)
    report = membership_uc(traffic) if args.kind == "uc" else membership_mc(traffic)
    payload = _membership_payload(report)
    if not report.member:
        raise _Infeasible(payload)
    return payload


def cmd_bounds(args) -> dict:
    placement = fileio.load_placement(args.placement)
    traffic = _load_traffic(args.traffic, args.kind)
    _check_n(placement.n, traffic.n)
    report = membership_uc(traffic) if args.kind == "uc" else membership_mc(traffic)
    br = bounds_mod.bounds_report(placement, args.alpha, report.rho_hat_star, args.kind)
    rho = report.rho_hat_star
    return {
        "kind": args.kind,
        "alpha": args.alpha,
        "r_min": r_min(placement),
        "inner_factor": br.inner_factor,
        "outer_factor": br.outer_factor,
        "gap_ratio": br.gap_ratio,
        "rho_hat_star": "unbounded" if math.isinf(rho) else rho,
        "rho_interval": ["unbounded", "unbounded"] if math.isinf(rho) else list(br.rho_interval),
        "cutset_values": [float(c) for c in br.cutset_values],
    }


def cmd_decompose(args) -> dict:
    traffic = fileio.load_unicast(args.traffic)
    scaled_by = 1.0
    if args.scale_to_region:
        rho = membership_uc(traffic).rho_hat_star
        if math.isinf(rho):
            raise ValueError("zero traffic cannot be scaled to the region boundary")
        traffic = traffic.scaled(rho)
        scaled_by = rho
    completed = complete_to_doubly_stochastic(traffic)
    decomp = birkhoff_decompose(completed)
    return {
        "n": decomp.n,
        "scaled_by": scaled_by,
        "schedules": [s.tolist() for s in decomp.schedules],
        "weights": decomp.weights.tolist(),
        "residual": decomp.residual,
    }


def cmd_route_mc(args) -> dict:
    placement = fileio.load_placement(args.placement)
    traffic = fileio.load_multicast(args.traffic)
    _check_n(placement.n, traffic.n)
    routing = route_over_star(traffic)
    achieved = multicast_achieved_rates(traffic, placement, args.alpha)
    floor = 2.0 ** (-1.0 - args.alpha / 2.0)
    return {
        "alpha": args.alpha,
        "uplink_load": routing.uplink_load.tolist(),
        "downlink_load": routing.downlink_load.tolist(),
        "uplink_padding": routing.uplink_padding().tolist(),
        "downlink_padding": routing.downlink_padding().tolist(),
        "achieved_multiple": achieved,
        "inner_floor": floor,
    }


def cmd_ia_demo(args) -> dict:
    k = args.n_pairs
    if k < 1:
        raise ValueError("--n-pairs must be positive")
    if args.horizon < 2:
        raise ValueError("--horizon must be at least 2")
    placement = uniform_random_placement(2 * k, args.seed)
    pairing = Pairing(tuple((i, k + i) for i in range(k)))
    slots = [
        sample_quantized_phases(2 * k, args.quantization, args.seed, t)
        for t in range(args.horizon)
    ]
    found = find_complementary_slot(pairing, args.quantization, slots)
    rates = ia_pair_rates(pairing, placement, args.alpha)
    result = {
        "pairs": [[u, w] for u, w in pairing.pairs],
        "quantization": args.quantization,
        "horizon": args.horizon,
        "slot_pair": None,
        "rates": rates,
    }
    if found is None:
        return result
    t1, t2 = found
    symbols = np.zeros(2 * k, dtype=complex)
    symbols[pairing.sources()] = 1.0
    s1 = make_slot_sample(placement, args.alpha, slots[t1], args.quantization, symbols, args.seed, t1)
    s2 = make_slot_sample(placement, args.alpha, slots[t2], args.quantization, symbols, args.seed, t2)
    combined = two_slot_combine(s1, s2, pairing)
    result.update(
        {
            "slot_pair": [t1, t2],
            "residual_interference": [
                abs(combined[w].residual_interference) for w in pairing.destinations()
            ],
            # unit-power symbols: |2h|^2 over the summed noise power
            "effective_snr": [
                abs(combined[w].signal_coefficient) ** 2 / combined[w].noise_power
                for w in pairing.destinations()
            ],
        }
    )
    return result


def cmd_rayleigh(args) -> dict:
    placement = fileio.load_placement(args.placement)
    plan = run_opportunistic(placement, args.alpha, args.seed, args.slots)
    rmin = r_min(placement)
    try:
        inner = rayleigh_inner_rate(placement.n, args.alpha)[1]
    except HypothesisError:
        inner = None
    outer = math.log2(4.0 * placement.n ** (2.0 + args.alpha / 2.0) * rmin ** (-args.alpha))
    return {
        "alpha": args.alpha,
        "slots": args.slots,
        "idle_fraction": plan.idle_fraction,
        "mean_coverage": plan.mean_coverage,
        "slot_rate_floor": guaranteed_slot_rate(placement.n, args.alpha),
        "empirical_pair_rate": plan.empirical_pair_rate(),
        "inner_multiple": inner,
        "outer_multiple": outer,
    }


def cmd_rayleigh_outer(args) -> dict:
    sol = solve_waterfill(args.n, args.alpha, args.rmin)
    return {
        "n": args.n,
        "alpha": args.alpha,
        "rmin": args.rmin,
        "g0": sol.g0,
        "expected_power": sol.expected_power,
        "bound_bits": sol.bound_bits,
    }


def cmd_table1(args) -> dict:
    sizes, rates, rounded = bounds_mod.table1_row(args.alpha)
    return {
        "alpha": args.alpha,
        "n": list(sizes),
        "rho_ia": list(rates),
        "rho_ia_rounded": list(rounded),
        "row": " ".join(rounded),
    }


class _Infeasible(Exception):
    """Carries a payload that should still be printed before exiting 1."""

    def __init__(self, payload: dict):
        super().__init__("infeasible traffic")
        self.payload = payload


_COMMANDS = {
    "place": cmd_place,
    "check": cmd_check,
    "bounds": cmd_bounds,
    "decompose": cmd_decompose,
    "route-mc": cmd_route_mc,
    "ia-demo": cmd_ia_demo,
    "rayleigh": cmd_rayleigh,
    "rayleigh-outer": cmd_rayleigh_outer,
    "table1": cmd_table1,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = _COMMANDS[args.command](args)
    except _Infeasible as exc:
        _emit(exc.payload, args.pretty)
        print("error: traffic is not feasible", file=sys.stderr)
        return 1
    except InfeasibleTrafficError as exc:
        print(f"error: infeasible traffic: {exc}", file=sys.stderr)
        return 1
    except HypothesisError as exc:
        print(f"error: hypothesis violated: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: could not parse JSON: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError, OSError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return 2
    _emit(report, args.pretty)
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
