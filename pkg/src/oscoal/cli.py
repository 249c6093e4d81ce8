"""Command-line front end: reproducible batch jobs over the library.

Subcommands: coeff, wigner, prob, yields, figures, selftest.  Exit codes:
0 success, 1 usage error, 2 invariant failure, 3 I/O error.  All outputs are
deterministic for a fixed argument list (including the seed): headers use
sorted JSON keys and floats carry 17 significant digits.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .expansion import Ame, coeff, coeff_oracle, degenerate_subspace
from .gridio import fmt17, write_prob_table, write_wigner_grid
from .ho1d import OscParams, quasi_prob_table
from .coalescence import PhasePoint, p_kl, shell_states, v_and_t
from .wigner3d import CLOSED_FORM_STATES, export_grid, level_crossings
from .yields import MCConfig, channel_table, load_particles, pair_yields

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_IO = 3

DEFAULT_THETAS = (0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_param_opts(parser):
    parser.add_argument("--nu", type=float, default=1.0, help="oscillator inverse length")
    parser.add_argument("--delta", type=float, default=None, help="wave-packet width")
    parser.add_argument("--hbar", type=float, default=1.0)
    parser.add_argument("--zeta", type=float, default=None,
                        help="scale ratio 2*delta*nu (overrides --delta)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=str, default=None, help="output path (default stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--verify", action="store_true",
                        help="also run the quadrature oracle where available")


def _resolve_params(args):
    nu = args.nu
    hbar = args.hbar
    if args.zeta is not None and args.delta is not None:
        if abs(2 * args.delta * nu - args.zeta) > 1e-12:
            raise _UsageError(
                f"--delta {args.delta} and --zeta {args.zeta} disagree (zeta = 2 delta nu)"
            )
    if args.zeta is not None:
        return OscParams.from_zeta(nu, args.zeta, hbar)
    if args.delta is not None:
        return OscParams(nu=nu, delta=args.delta, hbar=hbar)
    return OscParams.from_zeta(nu, 1.0, hbar)


def parse_grid_spec(spec, radial_names=("r", "q")):
    """Parse 'r:min:max:n,q:min:max:n,theta:v1,v2,...' into axes.

    The theta list must come last; its values may contain further commas.
    """
    tokens = spec.split(",")
    axes = {}
    thetas = None
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.startswith("theta:"):
            vals = [tok[len("theta:"):]] + tokens[i + 1 :]
            thetas = np.array([float(v) for v in vals if v != ""])
            break
        name, *rest = tok.split(":")
        if name not in radial_names or len(rest) != 3:
            raise _UsageError(f"bad grid token {tok!r}")
        lo, hi = float(rest[0]), float(rest[1])
        n = int(rest[2])
        if n < 2 or hi <= lo:
            raise _UsageError(f"bad grid range in {tok!r}")
        axes[name] = np.linspace(lo, hi, n)
        i += 1
    for name in radial_names:
        axes.setdefault(name, np.linspace(0.0, 4.0, 400))
    if thetas is None:
        thetas = np.array(DEFAULT_THETAS)
    return axes, thetas


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text)


# ---------------------------------------------------------------------------

def _coeff_rows(states, verify):
    rows = []
    max_dev = 0.0
    for state in states:
        for t in degenerate_subspace(state.energy_quantum):
            c = coeff(state, t)
            row = {
                "k": state.k, "l": state.l, "m": state.m,
                "n1": t.n1, "n2": t.n2, "n3": t.n3,
                "re": c.value.real, "im": c.value.imag,
                "exact": c.exact_str(),
            }
            if verify:
                o = coeff_oracle(state, t)
                row["oracle_re"] = o.real
                row["oracle_im"] = o.imag
                max_dev = max(max_dev, abs(c.value - o))
            rows.append(row)
    return rows, (max_dev if verify else None)


def cmd_coeff(args):
    if args.N is None and (args.k is None or args.l is None):
        raise _UsageError("coeff needs either --N or both --k and --l")
    states = []
    if args.N is not None:
        if args.N < 0 or args.N > 12:
            raise _UsageError("--N must be in 0..12")
        for k, l in shell_states(args.N):
            ms = [args.m] if args.m is not None else range(-l, l + 1)
            states.extend(Ame(k, l, m) for m in ms if abs(m) <= l)
    else:
        if 2 * args.k + args.l > 12:
            raise _UsageError("shells limited to 2k + l <= 12")
        ms = [args.m] if args.m is not None else range(-args.l, args.l + 1)
        states.extend(Ame(args.k, args.l, m) for m in ms)
    if not states:
        raise _UsageError("no states match the requested quantum numbers")
    rows, max_dev = _coeff_rows(states, args.verify)
    if args.format == "json":
        _emit(json.dumps(rows, sort_keys=True, indent=1), args.out)
        if max_dev is not None:
            print(f"max oracle deviation: {max_dev:.3e}", file=sys.stderr)
    else:
        cols = ["k", "l", "m", "n1", "n2", "n3", "re", "im", "exact"]
        if args.verify:
            cols += ["oracle_re", "oracle_im"]
        lines = [",".join(cols)]
        for row in rows:
            vals = []
            for c in cols:
                v = row[c]
                vals.append(fmt17(v) if isinstance(v, float) else str(v))
            lines.append(",".join(vals))
        if max_dev is not None:
            lines.append(f"# max_oracle_dev,{fmt17(max_dev)}")
        _emit("\n".join(lines) + "\n", args.out)
    if max_dev is not None and max_dev > 1e-8:
        print(f"oracle deviation {max_dev:.3e} exceeds 1e-8", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_wigner(args):
    params = _resolve_params(args)
    axes, thetas = parse_grid_spec(args.grid, radial_names=("r", "q"))
    grid = export_grid(args.k, args.l, axes["r"], axes["q"], thetas, params)
    if args.verify:
        from .wigner3d import PhasePoint3D, wigner_kl, wigner_kl_oracle

        md = 0.0
        ri = np.linspace(0, len(grid.r_axis) - 1, 4, dtype=int)
        qi = np.linspace(0, len(grid.q_axis) - 1, 3, dtype=int)
        for i in ri:
            for j in qi:
                for s, th in enumerate(grid.theta_axis):
                    pt = PhasePoint3D.from_invariants(grid.r_axis[i], grid.q_axis[j], th)
                    md = max(md, abs(grid.values[i, j, s] - wigner_kl(args.k, args.l, pt, params)))
        md_oracle = 0.0
        if 2 * args.k + args.l <= 3:
            for i in ri[1:3]:
                pt = PhasePoint3D.from_invariants(grid.r_axis[i], grid.q_axis[qi[1]],
                                                  grid.theta_axis[0])
                md_oracle = max(
                    md_oracle,
                    abs(grid.values[i, qi[1], 0] - wigner_kl_oracle(args.k, args.l, pt, params)),
                )
        if md > 1e-10 or md_oracle > 1e-8:
            print(f"verification failed: factorized dev {md:.3e}, oracle dev {md_oracle:.3e}",
                  file=sys.stderr)
            return EXIT_INVARIANT
    if args.out is None:
        raise _UsageError("wigner requires --out (grids are large)")
    write_wigner_grid(grid, args.out)
    return EXIT_OK


def cmd_prob(args):
    params = _resolve_params(args)
    axes, thetas = parse_grid_spec(args.grid, radial_names=("r", "p"))
    if (args.k is None) != (args.l is None):
        raise _UsageError("give both --k and --l, or neither for all N <= 3")
    levels = [(args.k, args.l)] if args.k is not None else list(CLOSED_FORM_STATES)
    rows = []
    for k, l in levels:
        for r in axes["r"]:
            for p in axes["p"]:
                for th in thetas:
                    rel = PhasePoint.from_invariants(r, p, th)
                    v, t = v_and_t(rel.r_vec, rel.p_vec, params)
                    rows.append((k, l, r, p, th, v, t, p_kl(k, l, rel, params)))
    if args.out is None:
        raise _UsageError("prob requires --out")
    if args.verify:
        from .coalescence import p_kl_oracle

        md = 0.0
        for k, l, r, p, th, v, t, prob in rows[:: max(1, len(rows) // 12)]:
            rel = PhasePoint.from_invariants(r, p, th)
            md = max(md, abs(prob - p_kl_oracle(k, l, rel, params)))
        if md > 1e-7:
            print(f"verification failed: oracle dev {md:.3e}", file=sys.stderr)
            return EXIT_INVARIANT
    write_prob_table(rows, params, args.out, extra={"zeta": params.zeta})
    return EXIT_OK


def cmd_yields(args):
    params_file = json.loads(Path(args.params).read_text())
    nu = float(params_file["nu"])
    hbar = float(params_file.get("hbar", 1.0))
    if "zeta_override" in params_file:
        params = OscParams.from_zeta(nu, float(params_file["zeta_override"]), hbar)
    else:
        params = OscParams(nu=nu, delta=float(params_file["delta"]), hbar=hbar)
    records = load_particles(args.particles)
    species = {}
    for rec in records:
        species.setdefault(rec.species, []).append(rec)
    if len(species) != 2:
        raise _UsageError(f"need exactly two species, found {sorted(species)}")
    (tag1, list1), (tag2, list2) = sorted(species.items())
    pf_bins = None
    if args.pf_bins:
        lo, hi, n = args.pf_bins.split(":")
        pf_bins = tuple(np.linspace(float(lo), float(hi), int(n) + 1))
    cfg = MCConfig(seed=args.seed, max_pairs=args.budget, pf_bins=pf_bins,
                   pf_axis=args.pf_axis, smear=args.smear)
    report = pair_yields(list1, list2, channel_table(), params, cfg)
    _emit(json.dumps(report.to_json_dict(), sort_keys=True, indent=1), args.out)
    return EXIT_OK


def _figure1(outdir, params, resolution):
    paths = []
    r_axis = np.linspace(0.0, 4.0 / params.nu, resolution)
    q_axis = np.linspace(0.0, 4.0 * params.hbar * params.nu, resolution)
    for k, l in CLOSED_FORM_STATES:
        grid = export_grid(k, l, r_axis, q_axis, np.array(DEFAULT_THETAS), params)
        path = Path(outdir) / f"fig1_w{k}{l}.dat"
        write_wigner_grid(grid, path)
        paths.append(path)
    return paths


def _figure2(outdir, params, resolution):
    paths = []
    rho = np.linspace(0.0, 5.0, resolution)
    pit = np.linspace(0.0, 5.0, resolution)
    r_axis = rho / params.nu
    p_axis = pit * params.nu * params.hbar
    R, P = np.meshgrid(r_axis, p_axis, indexing="ij")
    for n in (0, 1, 2):
        for zeta in (0.25, 1.0, 4.0):
            pz = OscParams.from_zeta(params.nu, zeta, params.hbar)
            vals = quasi_prob_table(R, P, pz, n)[n, n].real
            contour = level_crossings(r_axis, p_axis, vals, 0.2)
            path = Path(outdir) / f"fig2_p{n}{n}_zeta{zeta:g}.dat"
            header = json.dumps(
                {
                    "type": "quasi_prob_grid",
                    "n": n,
                    "zeta": zeta,
                    "params": {"nu": pz.nu, "delta": pz.delta, "hbar": pz.hbar},
                    "axes": {"r": [fmt17(v) for v in r_axis],
                             "p": [fmt17(v) for v in p_axis]},
                    "contour_0p2": [[fmt17(x), fmt17(y)] for x, y in contour],
                },
                sort_keys=True, separators=(",", ":"),
            )
            with open(path, "w") as fh:
                fh.write(header + "\n")
                fh.write("r,p,P\n")
                for i, r in enumerate(r_axis):
                    for j, p in enumerate(p_axis):
                        fh.write(f"{fmt17(r)},{fmt17(p)},{fmt17(vals[i, j])}\n")
            paths.append(path)
    return paths


def _figure3(outdir, params, resolution):
    thetas = np.linspace(0.0, math.pi / 2, resolution)
    r0 = 1.0 / params.nu
    p0 = params.hbar * params.nu
    path = Path(outdir) / "fig3_theta.dat"
    header = json.dumps(
        {
            "type": "theta_scan",
            "r": fmt17(r0),
            "p": fmt17(p0),
            "params": {"nu": params.nu, "delta": params.delta, "hbar": params.hbar},
        },
        sort_keys=True, separators=(",", ":"),
    )
    with open(path, "w") as fh:
        fh.write(header + "\n")
        fh.write("theta,v,t,P03,P11\n")
        for th in thetas:
            rel = PhasePoint.from_invariants(r0, p0, th)
            v, t = v_and_t(rel.r_vec, rel.p_vec, params)
            fh.write(
                f"{fmt17(th)},{fmt17(v)},{fmt17(t)},"
                f"{fmt17(p_kl(0, 3, rel, params))},{fmt17(p_kl(1, 1, rel, params))}\n"
            )
    return [path]


def cmd_figures(args):
    params = _resolve_params(args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig = {1: _figure1, 2: _figure2, 3: _figure3}[args.id]
    resolution = args.resolution if args.resolution else (400 if args.id != 3 else 181)
    paths = fig(outdir, params, resolution)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest

    ok, _ = run_selftest(inject_fault=args.inject_fault)
    return EXIT_OK if ok else EXIT_INVARIANT


def build_parser():
    parser = _Parser(prog="oscoal", description=__doc__)
    parser.add_argument("--version", action="version", version=f"oscoal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeff", help="exact expansion coefficients")
    _add_param_opts(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--N", type=int, default=None, help="whole energy shell")
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("wigner", help="m-averaged Wigner distribution grid")
    _add_param_opts(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--grid", type=str, default="r:0:4:400,q:0:4:400")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("prob", help="coalescence probability tables")
    _add_param_opts(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--grid", type=str, default="r:0:3:31,p:0:3:31")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("yields", help="ensemble yields from a particle list")
    _add_param_opts(p)
    p.add_argument("--particles", type=str, required=True, help="particle CSV")
    p.add_argument("--params", type=str, required=True, help="params JSON sidecar")
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--pf-bins", type=str, default=None, help="lo:hi:nbins")
    p.add_argument("--pf-axis", type=int, default=2, choices=(0, 1, 2))
    p.add_argument("--smear", action="store_true", help="J-smeared spectra")
    p.set_defaults(func=cmd_yields)

    p = sub.add_parser("figures", help="emit the data grids behind the figures")
    _add_param_opts(p)
    p.add_argument("id", type=int, choices=(1, 2, 3))
    p.add_argument("--outdir", type=str, default=".")
    p.add_argument("--resolution", type=int, default=None)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("selftest", help="run the invariant suite")
    _add_param_opts(p)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
