"""Command-line entry point.

Exit codes: 0 success, 1 configuration/usage error, 2 enumeration guard
exceeded, 3 unexpected failure.
"""
from __future__ import annotations

import argparse
import sys
import traceback

from . import fileio, harness
from .errors import ConfigError, GuardExceeded


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; fold those into the
    # configuration-error exit code instead.
    def error(self, message):
        raise ConfigError(message)


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its keys")
    sub.add_argument("--seed", type=int, dest="seed")
    sub.add_argument("--threads", type=int, dest="threads")
    sub.add_argument("--out", dest="out", help="output path (CSV table, or matrix for build)")


def _add_code(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--m", type=int, dest="m", help="number of variables (block length 2^m)")
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--r", type=int, dest="r", help="order")
    group.add_argument("--rate", type=float, dest="rate", help="target rate; picks the minimal order")
    sub.add_argument("--l-target", type=int, dest="l_target", help="columns to keep after trimming")


def _build_parser() -> _Parser:
    parser = _Parser(prog="rmlab", description=__doc__)
    subs = parser.add_subparsers(dest="mode", required=True)

    p = subs.add_parser("build", help="construct and trim a generator matrix")
    _add_code(p)
    _add_common(p)

    p = subs.add_parser("rank", help="rank/nullity of a built or loaded matrix")
    p.add_argument("--in", dest="in_path", help="matrix file to load instead of building")
    _add_code(p)
    _add_common(p)

    p = subs.add_parser("simulate-source", help="compress a Bernoulli source and decode")
    _add_code(p)
    p.add_argument("--theta", type=float, dest="theta")
    p.add_argument("--trials", type=int, dest="trials")
    p.add_argument("--coset-guard-bits", type=int, dest="coset_guard_bits")
    _add_common(p)

    p = subs.add_parser("simulate-channel", help="send null-space codewords over a channel")
    _add_code(p)
    p.add_argument("--channel", dest="channel1", help="e.g. bsc:p=0.05, bec:eps=0.3, biawgn:sigma=0.8")
    p.add_argument("--trials", type=int, dest="trials")
    p.add_argument("--coset-guard-bits", type=int, dest="coset_guard_bits")
    _add_common(p)

    for name, blurb in (
        ("simulate-jscc", "two-step list decoding of a source seen through two channels"),
        ("simulate-parity", "uniform-source variant of the two-step setup"),
    ):
        p = subs.add_parser(name, help=blurb)
        _add_code(p)
        p.add_argument("--theta", type=float, dest="theta")
        p.add_argument("--channel1", dest="channel1")
        p.add_argument("--channel2", dest="channel2")
        p.add_argument("--list-size", type=int, dest="list_size")
        p.add_argument("--trials", type=int, dest="trials")
        _add_common(p)

    p = subs.add_parser("verify-lemma1", help="even-split probabilities against their bounds")
    _add_code(p)
    p.add_argument("--delta", type=float, dest="delta")
    p.add_argument("--epsilon", type=float, dest="epsilon")
    p.add_argument("--w-list", type=_int_list, dest="w_list", help="weights, e.g. 2,4,8 or 2..14")
    p.add_argument("--enum-guard-bits", type=int, dest="enum_guard_bits")
    _add_common(p)

    p = subs.add_parser("test-assumption1", help="joint vs product even-split probabilities")
    _add_code(p)
    p.add_argument("--w", type=int, dest="w")
    p.add_argument("--m-list", type=_int_list, dest="m_list", help="trend over m, e.g. 3..6")
    p.add_argument("--enum-guard-bits", type=int, dest="enum_guard_bits")
    _add_common(p)

    p = subs.add_parser("exponent", help="error exponent curve and its slope at zero")
    _add_code(p)
    p.add_argument("--theta", type=float, dest="theta")
    p.add_argument("--channel", dest="channel1", help="also evaluate a constant-profile channel variant")
    p.add_argument("--gamma-grid", type=_float_list, dest="gamma_grid")
    p.add_argument("--min-weight-frac", type=float, dest="min_weight_frac")
    p.add_argument("--enum-guard-bits", type=int, dest="enum_guard_bits")
    _add_common(p)

    p = subs.add_parser("prop1-table", help="minimum distances of rate-feasible constructions")
    p.add_argument("--rate", type=float, dest="rate")
    p.add_argument("--m-list", type=_int_list, dest="m_list")
    _add_common(p)

    p = subs.add_parser("sweep", help="repeat a mode over one swept parameter")
    p.add_argument("--base-mode", dest="base_mode", help="mode to repeat at each point")
    p.add_argument("--sweep-param", dest="sweep_param", choices=list(harness._SWEEPABLE))
    p.add_argument("--sweep-values", type=_float_list, dest="sweep_values")
    _add_code(p)
    p.add_argument("--theta", type=float, dest="theta")
    p.add_argument("--channel1", dest="channel1")
    p.add_argument("--channel2", dest="channel2")
    p.add_argument("--list-size", type=int, dest="list_size")
    p.add_argument("--trials", type=int, dest="trials")
    p.add_argument("--gamma-grid", type=_float_list, dest="gamma_grid")
    p.add_argument("--min-weight-frac", type=float, dest="min_weight_frac")
    _add_common(p)

    return parser


def _emit(outcome: harness.RunOutcome, out: str | None) -> None:
    if outcome.text:
        print(outcome.text)
    if outcome.rows:
        sys.stdout.write(fileio.render_csv(outcome.header, outcome.rows))
    if out is None:
        return
    if outcome.mode == "build":
        fileio.save_rm(out, outcome.matrix)
        print(f"wrote {out}")
        return
    if outcome.rows:
        fileio.write_csv(out, outcome.header, outcome.rows)
        print(f"wrote {out}")
    if outcome.records:
        fileio.write_jsonl(out + ".jsonl", outcome.records)
        print(f"wrote {out}.jsonl")


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        overrides = {
            k: v for k, v in vars(args).items() if k != "config" and v is not None
        }
        if "sweep_values" in overrides:
            overrides["sweep_values"] = tuple(overrides["sweep_values"])
        for key in ("gamma_grid", "w_list", "m_list"):
            if key in overrides:
                overrides[key] = tuple(overrides[key])
        cfg = harness.parse_config(args.config, overrides)
        outcome = harness.run(cfg)
        _emit(outcome, cfg.out)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        # Unreadable --in / unwritable --out paths are usage problems, not
        # internal failures; keep exit 3 for genuine bugs.
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # pragma: no cover - safety net for the console script
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
