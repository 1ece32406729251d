"""Command-line front end: ``cpf {sweep,fig,verify,eval}``."""
import argparse
import math
import sys
import time

import numpy as np

from . import discrimination as d
from . import fock
from . import gaussian as g
from . import sweep as sw
from . import target_finding as tf


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_override(item):
    key, sep, value = item.partition("=")
    if not sep:
        raise sw.SpecError("--set", f"expected key=value, got {item!r}")
    return key.strip(), float(value)


def cmd_sweep(args):
    with open(args.config, encoding="utf-8") as fh:
        spec = sw.SweepSpec.from_yaml(fh.read())
    for item in args.set or []:
        k, v = _parse_override(item)
        spec.fixed[k] = v
    out = args.out or spec.output
    csv, summary = sw.run_sweep(spec, jobs=args.jobs)
    _write(csv, out)
    print(summary, file=sys.stderr if not out else sys.stdout)
    return 0


def cmd_fig(args):
    spec = sw.preset(args.preset)
    csv, summary = sw.run_sweep(spec, jobs=args.jobs)
    _write(csv, args.out)
    print(summary, file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_eval(args):
    app = sw.APPLICATIONS[args.application]
    params = {k: getattr(args, k) for k in app.params if getattr(args, k, None) is not None}
    quantities = args.quantity or sorted(app.quantities)
    sw.SweepSpec(args.application, params, [], quantities).validate(point_only=True)
    row = sw.evaluate_point(args.application, params, quantities)
    header, cells = [], []
    for q in quantities:
        value, logv, _, se = row[q]
        header.append(q)
        if logv is None:
            cells.append(sw._fmt(value))
            continue
        cells.append(sw._fmt(value) if value >= sw.LINEAR_FLOOR else "")
        header.append(f"log10_{q}")
        cells.append(sw._fmt(logv / sw.LN10) if logv > -math.inf else "-inf")
        if se is not None:
            header.append(f"stderr_{q}")
            cells.append(sw._fmt(se))
    print(",".join(header))
    print(",".join(cells))
    return 0


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

def _report(name, ok, msg):
    print(f"{'PASS' if ok else 'FAIL'} {name}: {msg}")
    return ok


def verify_cn(trials, seed):
    ok = True
    for m, z1, z2 in ((2, 0.3, 0.3), (50, 0.05, 0.2), (100, 0.1, 0.1)):
        e = d.ErrorPair(z1, z2)
        r = d.cn_monte_carlo(m, e, trials, seed)
        exact = d.cn_error(m, e)
        z = abs(r.value - exact) / r.detail["stderr"]
        ok &= _report(f"cn m={m} z1={z1} z2={z2}", z < 3,
                      f"MC {r.value:.6f} vs {exact:.6f}, |dev| = {z:.2f} sigma "
                      f"({trials} trials, {r.detail['backend']})")
    return ok


def verify_fidelity(seed, n_states=100):
    rng = np.random.default_rng(seed)
    families = ["one_mode", "product", "lossy_tmsv", "lossy_pure"]
    worst, worst_leak = 0.0, 0.0
    for i in range(n_states):
        fam = families[i % len(families)]
        if fam == "one_mode":
            fa, ga = fock.random_one_mode_pair(rng)
            fb, gb = fock.random_one_mode_pair(rng, fa.cutoff)
        else:
            fa, ga = fock.random_two_mode_pair(rng, fam)
            fb, gb = fock.random_two_mode_pair(rng, fam, fa.cutoff)
        worst_leak = max(worst_leak, fa.leakage, fb.leakage)
        worst = max(worst, abs(fock.uhlmann_fidelity(fa, fb) - g.fidelity(ga, gb)))
    return _report("fidelity", worst < 1e-6 and worst_leak < 1e-8,
                   f"max |dF^2| = {worst:.3e} over {n_states} pairs, "
                   f"max leakage {worst_leak:.1e}")


def verify_dd(trials, seed, m=5):
    p = tf.TargetFindingParams(m, 10, 0.01, 0.9, 2.0)
    exact = tf.dd_error(p)
    mc, se = fock.dd_monte_carlo(m, p.signal, p.N_B, trials, seed)
    z = abs(mc - exact) / se
    return _report(f"dd m={m}", z < 3,
                   f"MC {mc:.6f} vs {exact:.6f}, |dev| = {z:.2f} sigma ({trials} trials)")


def cmd_verify(args):
    t0 = time.perf_counter()
    trials = int(float(args.trials))
    if args.suite == "cn":
        ok = verify_cn(trials, args.seed)
    elif args.suite == "fidelity":
        ok = verify_fidelity(args.seed)
    else:
        ok = verify_dd(trials, args.seed, args.m)
    print(f"elapsed {time.perf_counter() - t0:.1f} s")
    return 0 if ok else 1


# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="cpf", description="Channel-position finding error probabilities")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a sweep described by a YAML file")
    p.add_argument("config")
    p.add_argument("--out", help="CSV path (default: spec output, else stdout)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a fixed parameter")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fig", help="figure-data preset")
    p.add_argument("preset", help=", ".join(sw.fig_presets()))
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_fig)

    p = sub.add_parser("verify", help="closed form vs oracle checks")
    p.add_argument("suite", choices=["cn", "fidelity", "dd"])
    p.add_argument("--trials", default="1e6")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--m", type=int, default=5, help="sectors for the dd suite")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="evaluate quantities at one parameter point")
    esub = p.add_subparsers(dest="application", required=True)
    for name, app in sw.APPLICATIONS.items():
        ep = esub.add_parser(name)
        for key, typ in app.params.items():
            ep.add_argument(f"--{key}", type=float if typ is float else int)
        ep.add_argument("--quantity", action="append", choices=sorted(app.quantities),
                        help="repeatable; default all")
        ep.set_defaults(func=cmd_eval)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except sw.SpecError as exc:
        print(f"error: invalid specification: field={exc.field}: {exc.message}", file=sys.stderr)
        return 2
    except tf.PrecisionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
