"""Command-line front end.

Three subcommands:

* run       -- execute a Monte Carlo experiment plan and write the CSV
* crb       -- evaluate the fast bound once for a fully specified instance
* selftest  -- internal consistency checks (two-path equality, gradients)

Configuration is a flat text file of "key = value" lines; blank lines and
"#" comments are ignored. --override key=value (repeatable) takes
precedence over the file. Exit codes: 0 success, 1 usage or configuration
error, 2 numerical failure, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import sys
import numpy as np

from .crb_blind import crb_direct, crb_fast, default_anchor, fim_blocks
from .errors import NumericalError
from .estimator import EstimatorSettings
from .harness import ExperimentPlan, format_csv, run_experiment, write_csv
from .model import (
    SystemConfig,
    build_K,
    composite_channel_matrix,
    generate_symbols,
    loglik_gradients,
    make_precoder,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_SELFTEST = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would sys.exit(2); route usage problems to exit code 1 instead.
    def error(self, message):
        raise _UsageError(message)


# key -> (parser, canonical formatter)
def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    raise ValueError(f"expected true or false, got {text!r}")


def _parse_float_list(text: str) -> tuple:
    return tuple(float(tok) for tok in text.split(","))


def _parse_complex_list(text: str) -> tuple:
    return tuple(complex(tok.strip()) for tok in text.split(","))


def _fmt_float(v) -> str:
    return repr(float(v))


def _fmt_complex_list(vs) -> str:
    return ", ".join(repr(complex(v)).strip("()") for v in vs)


_KEY_SPECS = {
    "M": (int, str),
    "L": (int, str),
    "N": (int, str),
    "sigma2": (float, _fmt_float),
    "redundancy_kind": (str, str),
    "inner_kind": (str, str),
    "snr_db_grid": (_parse_float_list, lambda vs: ", ".join(_fmt_float(v) for v in vs)),
    "n_channels": (int, str),
    "n_trials": (int, str),
    "master_seed": (int, str),
    "window_blocks": (int, str),
    "shrinkage": (float, _fmt_float),
    "compute_zp_reference": (_parse_bool, lambda v: "true" if v else "false"),
    "h": (_parse_complex_list, _fmt_complex_list),
    "s_n": (_parse_complex_list, _fmt_complex_list),
    "d": (int, str),
    "seed": (int, str),
}

_RUN_KEYS = (
    "M", "L", "N", "sigma2", "redundancy_kind", "inner_kind", "snr_db_grid",
    "n_channels", "n_trials", "master_seed", "window_blocks", "shrinkage",
    "compute_zp_reference",
)

_CRB_KEYS = (
    "M", "L", "N", "sigma2", "redundancy_kind", "inner_kind", "h", "s_n",
    "d", "seed",
)

_RUN_DEFAULTS = {
    "M": 12,
    "L": 4,
    "N": 8,
    "sigma2": 1.0,
    "redundancy_kind": "cp",
    "inner_kind": "identity",
    "snr_db_grid": (10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0),
    "n_channels": 20,
    "n_trials": 5,
    "master_seed": 0,
    "window_blocks": 2,
    "shrinkage": 0.0,
    "compute_zp_reference": False,
}

_CRB_DEFAULTS = {
    "M": 12,
    "L": 4,
    "N": 8,
    "sigma2": 1.0,
    "redundancy_kind": "cp",
    "inner_kind": "identity",
    "seed": 0,
}


def _parse_config_text(text: str, allowed) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in allowed:
            raise _UsageError(f"line {lineno}: unknown key {key!r}")
        parse = _KEY_SPECS[key][0]
        try:
            values[key] = parse(value)
        except ValueError as err:
            raise _UsageError(f"line {lineno}: bad value for {key}: {err}") from None
    return values


def _apply_overrides(values: dict, overrides, allowed) -> dict:
    for item in overrides or ():
        if "=" not in item:
            raise _UsageError(f"override {item!r} is not of the form key=value")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in allowed:
            raise _UsageError(f"unknown override key {key!r}")
        parse = _KEY_SPECS[key][0]
        try:
            values[key] = parse(value.strip())
        except ValueError as err:
            raise _UsageError(f"bad value for override {key}: {err}") from None
    return values


def _collect(args, allowed, defaults) -> dict:
    values = dict(defaults)
    if args.config is not None:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as err:
            raise _UsageError(f"cannot read config: {err}") from None
        values.update(_parse_config_text(text, allowed))
    _apply_overrides(values, args.override, allowed)
    return values


def _dump_config(values: dict, keys) -> str:
    lines = []
    for key in keys:
        if key not in values or values[key] is None:
            continue
        fmt = _KEY_SPECS[key][1]
        lines.append(f"{key} = {fmt(values[key])}")
    return "\n".join(lines) + "\n"


def _plan_from_values(values: dict) -> ExperimentPlan:
    try:
        config = SystemConfig(
            M=values["M"],
            L=values["L"],
            N=values["N"],
            sigma2=values["sigma2"],
            redundancy_kind=values["redundancy_kind"],
            inner_kind=values["inner_kind"],
        )
        return ExperimentPlan(
            config=config,
            snr_db_grid=values["snr_db_grid"],
            n_channels=values["n_channels"],
            n_trials=values["n_trials"],
            master_seed=values["master_seed"],
            estimator_settings=EstimatorSettings(
                window_blocks=values["window_blocks"],
                shrinkage=values["shrinkage"],
            ),
            compute_zp_reference=values["compute_zp_reference"],
        )
    except ValueError as err:
        raise _UsageError(str(err)) from None


def _cmd_run(args) -> int:
    values = _collect(args, _RUN_KEYS, _RUN_DEFAULTS)
    if args.seed is not None:
        values["master_seed"] = args.seed
    plan = _plan_from_values(values)  # validate before dumping
    if args.dump_config:
        sys.stdout.write(_dump_config(values, _RUN_KEYS))
        return EXIT_OK
    records = run_experiment(plan)
    if args.out is not None:
        write_csv(records, args.out)
    else:
        sys.stdout.write(format_csv(records))
    return EXIT_OK


def _cmd_crb(args) -> int:
    values = _collect(args, _CRB_KEYS, _CRB_DEFAULTS)
    if args.seed is not None:
        values["seed"] = args.seed
    if "h" not in values:
        raise _UsageError("the crb command needs channel taps (key 'h')")
    if args.dump_config:
        sys.stdout.write(_dump_config(values, _CRB_KEYS))
        return EXIT_OK
    try:
        config = SystemConfig(
            M=values["M"],
            L=values["L"],
            N=values["N"],
            sigma2=values["sigma2"],
            redundancy_kind=values["redundancy_kind"],
            inner_kind=values["inner_kind"],
        )
    except ValueError as err:
        raise _UsageError(str(err)) from None
    h = np.asarray(values["h"], dtype=np.complex128)
    if h.size != config.L + 1:
        raise _UsageError(f"h must have L+1 = {config.L + 1} taps, got {h.size}")
    precoder = make_precoder(config)
    if "s_n" in values:
        sN = np.asarray(values["s_n"], dtype=np.complex128)
        if sN.size != config.N * config.M:
            raise _UsageError(
                f"s_n must have N*M = {config.N * config.M} entries, got {sN.size}"
            )
    else:
        sN = generate_symbols("qpsk", config.M, config.N, values["seed"]).sN
    d = values.get("d", default_anchor(h))
    if not 0 <= d < h.size:
        raise _UsageError(f"anchor index {d} outside 0..{h.size - 1}")
    result = crb_fast(h, sN, precoder, d, config.sigma2, config.N)
    print(f"trace = {result.trace:.12g}")
    with np.printoptions(precision=6, suppress=False, linewidth=120):
        print(result.C)
    return EXIT_OK


def _selftest_two_path() -> list:
    failures = []
    cases = [
        ("cp", "identity", 4, 2, 4),
        ("zp", "identity", 4, 1, 5),
        ("cp", "idft", 6, 3, 3),
        ("zp", "idft", 5, 2, 3),
    ]
    for idx, (redundancy, inner, M, L, N) in enumerate(cases):
        rng = np.random.default_rng(1000 + idx)
        config = SystemConfig(
            M=M, L=L, N=N, sigma2=0.25,
            redundancy_kind=redundancy, inner_kind=inner,
        )
        precoder = make_precoder(config)
        h = (rng.standard_normal(L + 1) + 1j * rng.standard_normal(L + 1)) / np.sqrt(2)
        h /= np.linalg.norm(h)
        sN = generate_symbols("qpsk", M, N, rng).sN
        d = default_anchor(h)
        K, K_list = build_K(config, precoder, h)
        direct = crb_direct(fim_blocks(K, K_list, sN, config.sigma2), d)
        fast = crb_fast(h, sN, precoder, d, config.sigma2, config.N)
        rel = np.linalg.norm(fast.C - direct.C) / np.linalg.norm(direct.C)
        label = f"two-path {redundancy}/{inner} M={M} L={L} N={N}"
        if rel <= 1e-8:
            print(f"selftest {label}: ok (rel err {rel:.2e})")
        else:
            print(f"selftest {label}: FAIL (rel err {rel:.2e})")
            failures.append(label)
    return failures


def _selftest_gradients() -> list:
    failures = []
    rng = np.random.default_rng(7)
    config = SystemConfig(M=4, L=2, N=3, sigma2=0.5)
    precoder = make_precoder(config)
    h = (rng.standard_normal(3) + 1j * rng.standard_normal(3)) / np.sqrt(2)
    sN = generate_symbols("qpsk", config.M, config.N, rng).sN
    y = composite_channel_matrix(precoder.F, h, config.N) @ sN
    y += 0.1 * (rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size))

    def loglik(taps):
        K = composite_channel_matrix(precoder.F, taps, config.N)
        e = y - K @ sN
        return -float(np.real(np.vdot(e, e))) / config.sigma2

    grad_h, _ = loglik_gradients(y, config, precoder, h, sN)
    eps = 1e-6
    worst = 0.0
    for l in range(h.size):
        delta = np.zeros_like(h)
        delta[l] = eps
        d_re = (loglik(h + delta) - loglik(h - delta)) / (2 * eps)
        d_im = (loglik(h + 1j * delta) - loglik(h - 1j * delta)) / (2 * eps)
        fd = (d_re + 1j * d_im) / 2
        worst = max(worst, abs(fd - grad_h[l]) / abs(grad_h[l]))
    if worst <= 1e-6:
        print(f"selftest gradients: ok (rel err {worst:.2e})")
    else:
        print(f"selftest gradients: FAIL (rel err {worst:.2e})")
        failures.append("gradients")
    return failures


def _cmd_selftest(args) -> int:
    failures = _selftest_two_path() + _selftest_gradients()
    if failures:
        print(f"selftest: {len(failures)} check(s) failed")
        return EXIT_SELFTEST
    print("selftest: all checks passed")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="blindcrb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument(
            "--override",
            action="append",
            metavar="KEY=VALUE",
            help="override one config key (repeatable)",
        )
        p.add_argument("--out", help="output file path")
        p.add_argument("--seed", type=int, help="override the seed")
        p.add_argument(
            "--dump-config",
            action="store_true",
            help="print the effective configuration and exit",
        )

    p_run = sub.add_parser("run", help="run a Monte Carlo experiment")
    add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_crb = sub.add_parser("crb", help="evaluate the bound for one instance")
    add_common(p_crb)
    p_crb.set_defaults(func=_cmd_crb)

    p_self = sub.add_parser("selftest", help="run internal consistency checks")
    add_common(p_self)
    p_self.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse --help exits 0
        return EXIT_OK if (exc.code or 0) == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
