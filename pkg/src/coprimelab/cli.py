"""Command-line surface: sampling, rendering, estimation and inspection.

Every parameter can come from a `key = value` config file (--config) with
`#` comments; explicit flags win over file values and file values win over
built-in defaults.  Commands that write files require --out and leave a
manifest.txt there echoing all effective parameters, in the same key = value
grammar, so the manifest itself reproduces the run.

Exit codes: 0 success, 1 failing check verdict, 2 domain error, 3 parse
error (bad flags, bad config file, missing required values).
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import numpy as np

from .arith import (
    SECOND_MOMENT_CSV_HEADER,
    second_moment_bound,
)
from .colouring import (
    Window,
    colour_window,
    infer_cosets,
    lattice_from_id,
    load_colouring,
    oracle_from_origin,
    sample_coset_config,
    save_colouring,
    save_config,
    truncation_error_bound,
)
from .errors import DomainError, ParseError
from .lattice import (
    build_golay,
    hypothesis_report,
    minimal_vectors,
    norm_sq,
    span_index,
    standard_lattice,
)
from .perco import (
    MC_CSV_HEADER,
    annulus_event,
    estimate_annulus,
    estimate_crossing,
    estimate_spanning,
    estimate_staircase,
    label_clusters,
    staircase,
    trial_seed,
)

_REQUIRED = object()

# additive layer palette, indexed by the subset of highlighted primes present
# (bit i set = membership in the i-th highlighted prime's coset).  Singles are
# cyan / yellow / magenta; two-colour mixes give the usual secondaries; the
# full triple mixes to white, which is why captions warn about the possible
# clash with genuinely-coprime points.
LAYER_PALETTE = {
    0b001: (0, 255, 255),
    0b010: (255, 255, 0),
    0b100: (255, 0, 255),
    0b011: (0, 255, 0),
    0b101: (0, 0, 255),
    0b110: (255, 0, 0),
    0b111: (255, 255, 255),
}

_CHECK_TARGETS = {
    "square": ("square", None, {}),
    "triangular": ("triangular", None, {}),
    "D3": ("D", 3, {}),
    "D4": ("D", 4, {}),
    "E8": ("E8", None, {}),
    "Leech": ("Leech", None, {}),
    "spread2": ("spread_out", 2, {"norm": "inf", "alpha": 2}),
}

_CHECK_RADIUS = {
    "square": 3, "triangular": 3, "D3": 3, "D4": 3,
    "E8": 2, "Leech": 2, "spread2": 3,
}


def _int(raw: str) -> int:
    return int(raw)


def _seed(raw: str) -> int:
    v = int(raw)
    if not 0 <= v < 2**64:
        raise ValueError("seed must fit in 64 bits")
    return v


def _ints(raw: str) -> tuple[int, ...]:
    parts = [p.strip() for p in raw.split(",")]
    return tuple(int(p) for p in parts)


def _text(raw: str) -> str:
    return raw


def _serialize(value) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


_SPECS: dict[str, dict[str, tuple] ] = {}


class _Parser(argparse.ArgumentParser):
    # let negative coordinate tuples like "-10,-10" through as values
    _COORDS = re.compile(r"^-\d+(,-?\d+)*$")

    def error(self, message):
        raise ParseError(message)

    def _parse_optional(self, arg_string):
        if self._COORDS.match(arg_string):
            return None
        return super()._parse_optional(arg_string)


def _opt(sub, cmd: str, flag: str, convert, default, help_text: str,
         choices=None) -> None:
    dest = flag.lstrip("-").replace("-", "_")
    _SPECS.setdefault(cmd, {})[dest] = (convert, default)
    if default not in (None, _REQUIRED):
        help_text = f"{help_text} (default: {_serialize(default)})"
    elif default is _REQUIRED:
        help_text = f"{help_text} (required)"
    kwargs = dict(dest=dest, default=None, help=help_text)
    if choices is not None:
        kwargs["choices"] = choices
    else:
        kwargs["metavar"] = dest.upper()
    sub.add_argument(flag, **kwargs)


def _read_config(path: str, cmd: str, spec: dict) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config file: {exc}")
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"line {lineno}: expected key = value")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key == "command":
            if raw != cmd:
                raise ParseError(f"line {lineno}: config is for command {raw!r}")
            continue
        if key not in spec:
            raise ParseError(f"line {lineno}: unknown key {key!r} for {cmd}")
        if key in values:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        values[key] = raw
    return values


def _finalize(args) -> dict:
    """Merge flags over config-file values over defaults; convert types."""
    spec = _SPECS[args.command]
    file_vals = _read_config(args.config, args.command, spec) if args.config else {}
    effective = {}
    for dest, (convert, default) in spec.items():
        raw = getattr(args, dest)
        if raw is None:
            raw = file_vals.get(dest)
        if raw is None:
            if default is _REQUIRED:
                raise ParseError(f"missing required --{dest.replace('_', '-')}")
            value = default
        else:
            try:
                value = convert(raw)
            except ValueError as exc:
                raise ParseError(f"bad value for {dest}: {raw!r} ({exc})")
        effective[dest] = value
        setattr(args, dest, value)
    return effective


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, effective: dict) -> None:
    lines = [f"command = {command}"]
    for key in sorted(effective):
        if effective[key] is not None:
            lines.append(f"{key} = {_serialize(effective[key])}")
    (out / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _emit(out: Path | None, name: str, text: str) -> None:
    sys.stdout.write(text)
    if out is not None:
        (out / name).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# commands


def cmd_sample(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    if out is None:
        raise ParseError("sample writes files; --out is required")
    window = Window(args.origin, args.extents)
    if args.oracle is not None:
        if args.lattice != "Z2":
            raise DomainError("the gcd oracle is defined on the Z2 grid")
        col = oracle_from_origin(args.oracle, window)
    else:
        spec = lattice_from_id(args.lattice)
        config = sample_coset_config(spec, args.P, args.seed)
        col = colour_window(config, window)
        save_config(config, out / "config.txt")
    save_colouring(col, out / "colouring.pgm")
    _write_manifest(out, "sample", effective)
    print(f"white fraction {col.white_fraction():.6f}")
    if args.oracle is None:
        bound = truncation_error_bound(window, args.P)
        print(f"truncation error bound {float(bound):.6g}")
    return 0


def _membership_mask(rep, p: int, window: Window) -> np.ndarray:
    mask = np.zeros(window.array_shape(), dtype=bool)
    o1, o2 = window.origin
    mask[(rep[1] - o2) % p :: p, (rep[0] - o1) % p :: p] = True
    return mask


def cmd_layers(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    if out is None:
        raise ParseError("layers writes files; --out is required")
    if args.lattice != "Z2":
        raise DomainError("layer rendering is defined on the Z2 grid")
    primes = args.primes
    if not 1 <= len(primes) <= 3 or len(set(primes)) != len(primes):
        raise DomainError("need 1 to 3 distinct highlighted primes")
    spec = lattice_from_id(args.lattice)
    config = sample_coset_config(spec, args.P, args.seed)
    for p in primes:
        if p not in config.reps:
            raise DomainError(f"highlighted prime {p} exceeds the cutoff P={args.P}")
    window = Window(args.origin, args.extents)
    col = colour_window(config, window)
    rgb = np.zeros(window.array_shape() + (3,), dtype=np.uint8)
    rgb[col.white] = (255, 255, 255)
    subset = np.zeros(window.array_shape(), dtype=np.uint8)
    for i, p in enumerate(primes):
        subset[_membership_mask(config.rep(p), p, window)] |= 1 << i
    for bits, colour in LAYER_PALETTE.items():
        if bits < 1 << len(primes):
            rgb[subset == bits] = colour
    header = (
        b"P6\n"
        + f"# origin={window.origin[0]} {window.origin[1]}\n".encode()
        + f"# extents={window.extents[0]} {window.extents[1]}\n".encode()
        + f"# provenance={col.provenance}\n".encode()
        + f"# primes={' '.join(str(p) for p in primes)}\n".encode()
        + f"{window.extents[0]} {window.extents[1]}\n255\n".encode()
    )
    with open(out / "layers.ppm", "wb") as fh:
        fh.write(header)
        fh.write(rgb.tobytes())
    save_config(config, out / "config.txt")
    _write_manifest(out, "layers", effective)
    print(f"layers.ppm written, {len(primes)} highlighted primes")
    return 0


def cmd_crossing(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    if args.P is None:
        args.P = effective["P"] = max(5, 2 * args.x)
    stats = estimate_crossing(args.n, args.x, args.trials, args.P, args.seed,
                              workers=args.workers)
    _emit(out, "crossing.csv", MC_CSV_HEADER + "\n" + stats.csv_row() + "\n")
    if out is not None:
        _write_manifest(out, "crossing", effective)
    return 0


def cmd_bounds(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    report = second_moment_bound(args.n, args.x, args.P)
    effective["P"] = report.P
    _emit(out, "bounds.csv", SECOND_MOMENT_CSV_HEADER + "\n" + report.csv_row() + "\n")
    if out is not None:
        _write_manifest(out, "bounds", effective)
    return 0


def cmd_annulus(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    stats = estimate_annulus(args.k, args.trials, args.P, args.seed,
                             workers=args.workers)
    _emit(out, "annulus.csv", MC_CSV_HEADER + "\n" + stats.csv_row() + "\n")
    lines = []
    if stats.successes:
        spec = lattice_from_id("Z2")
        k = args.k
        window = Window((-k, -k), (2 * k + 1, 2 * k + 1))
        for t in range(stats.trials):
            config = sample_coset_config(spec, args.P, trial_seed(args.seed, t))
            event = annulus_event(colour_window(config, window), k)
            if event.occurred:
                lines = [f"trial {t}"] + event.witness_lines()
                break
    if lines:
        _emit(out, "witness.txt", "\n".join(lines) + "\n")
    if out is not None:
        _write_manifest(out, "annulus", effective)
    return 0


def cmd_staircase(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    stats = estimate_staircase(args.n_max, args.trials, args.P, args.seed,
                               workers=args.workers)
    _emit(out, "staircase.csv", MC_CSV_HEADER + "\n" + stats.csv_row() + "\n")
    lines = []
    if stats.successes:
        spec = lattice_from_id("Z2")
        side = 2 ** (args.n_max + 1) + 1
        window = Window((0, 0), (side, side))
        for t in range(stats.trials):
            config = sample_coset_config(spec, args.P, trial_seed(args.seed, t))
            result = staircase(colour_window(config, window), 0, args.n_max)
            if result.succeeded:
                lines = [f"trial {t}"]
                lines += [f"stage {n} {kind} line={c}" for n, kind, c in result.witnesses]
                lines += [f"{x} {y}" for x, y in result.path]
                break
    if lines:
        _emit(out, "witness.txt", "\n".join(lines) + "\n")
    if out is not None:
        _write_manifest(out, "staircase", effective)
    return 0


def cmd_spanning(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    stats = estimate_spanning(args.length, args.trials, args.P, args.seed,
                              workers=args.workers)
    _emit(out, "spanning.csv", MC_CSV_HEADER + "\n" + stats.csv_row() + "\n")
    if out is not None:
        _write_manifest(out, "spanning", effective)
    return 0


_ADJACENCIES = {
    "square": lambda: standard_lattice("square")[1],
    "triangular": lambda: standard_lattice("triangular")[1],
    "spread2": lambda: standard_lattice("spread_out", 2, norm="inf", alpha=2)[1],
}


def cmd_clusters(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    spec = lattice_from_id(args.lattice)
    config = sample_coset_config(spec, args.P, args.seed)
    col = colour_window(config, Window(args.origin, args.extents))
    S = _ADJACENCIES[args.adjacency]()
    labels = label_clusters(col, S, args.colour)
    coloured = int((labels.labels >= 0).sum())
    rows = [
        ("colour", args.colour),
        ("adjacency", args.adjacency),
        ("points", col.window.point_count),
        ("coloured_points", coloured),
        ("components", labels.count),
        ("largest", int(labels.sizes.max()) if labels.count else 0),
        ("boundary_components", len(labels.boundary_components())),
    ]
    text = "key,value\n" + "".join(f"{k},{v}\n" for k, v in rows)
    _emit(out, "clusters.csv", text)
    if out is not None:
        _write_manifest(out, "clusters", effective)
    return 0


def cmd_lattice(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    spec = lattice_from_id(args.lattice)
    vectors = minimal_vectors(spec)
    if args.action == "dump":
        text = "".join(" ".join(str(c) for c in v) + "\n" for v in vectors)
        name = "vectors.txt"
    else:
        rows = [
            ("lattice", spec.name),
            ("dim", spec.dim),
            ("determinant", spec.determinant),
            ("minimal_vectors", len(vectors)),
            ("minimal_norm_sq", norm_sq(spec, vectors.vectors[0])),
            ("span_index", span_index(vectors.vectors, spec)),
        ]
        text = "key,value\n" + "".join(f"{k},{v}\n" for k, v in rows)
        name = "lattice.csv"
    _emit(out, name, text)
    if out is not None:
        _write_manifest(out, "lattice", effective)
    return 0


def cmd_golay(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    code = build_golay()
    if args.dump is not None:
        words = {
            "generators": code.generators,
            "codewords": code.codewords,
            "octads": code.octads,
            "dodecads": code.dodecads,
        }[args.dump]
        text = "".join(format(w, "024b")[::-1] + "\n" for w in words)
        name = f"{args.dump}.txt"
    else:
        weights = {}
        for w in code.codewords:
            weights[bin(w).count("1")] = weights.get(bin(w).count("1"), 0) + 1
        rows = [("codewords", len(code.codewords)), ("dimension", len(code.generators))]
        rows += [(f"weight_{k}", weights[k]) for k in sorted(weights)]
        text = "key,value\n" + "".join(f"{k},{v}\n" for k, v in rows)
        name = "golay.csv"
    _emit(out, name, text)
    if out is not None:
        _write_manifest(out, "golay", effective)
    return 0


def cmd_check(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    kind, d, kw = _CHECK_TARGETS[args.lattice]
    spec, S = standard_lattice(kind, d, **kw)
    radius = args.radius if args.radius is not None else _CHECK_RADIUS[args.lattice]
    effective["radius"] = radius
    report = hypothesis_report(spec, S, args.theorem, radius, args.search_radius)
    lines = [f"target={args.lattice} lattice={report.lattice} theorem={report.theorem}"]
    for adj in report.adjacency:
        status = "pass (exact)" if adj.passed else f"FAIL witness={adj.witness}"
        lines.append(f"adjacency axis={adj.axis} mode={adj.mode} {status}")
    for cert in report.slices:
        status = "pass-bounded" if cert.passed else "FAIL"
        lines.append(
            f"slices axis={cert.axis} {status} radius={cert.certify_radius}"
            f" points={cert.points_certified} method={cert.method}"
        )
        if not cert.passed and cert.unreached:
            lines.append(f"  unreached example: {cert.unreached}")
    lines.append(f"verdict {report.verdict}")
    _emit(out, "check.txt", "\n".join(lines) + "\n")
    if out is not None:
        _write_manifest(out, "check", effective)
    return 0 if report.passed else 1


def cmd_infer(args) -> int:
    effective = _finalize(args)
    out = _out_dir(args)
    col = load_colouring(args.pgm)
    result = infer_cosets(col, args.p_max)
    lines = []
    for p in sorted(result.candidates):
        cands = " | ".join(" ".join(str(r) for r in c) for c in result.candidates[p])
        lines.append(f"p={p} candidates: {cands}")
    if result.truncation_warning:
        lines.append("warning: window may owe black points to primes beyond the"
                     " config cutoff; candidates above its P are unreliable")
    _emit(out, "infer.txt", "\n".join(lines) + "\n")
    if out is not None:
        _write_manifest(out, "infer", effective)
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> _Parser:
    parser = _Parser(prog="coprimelab",
                     description="coprime colouring laboratory")
    subs = parser.add_subparsers(dest="command", required=True)

    def sub(name, fn, help_text):
        p = subs.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--config", default=None, metavar="FILE",
                       help="key = value file; flags override its values")
        p.add_argument("--out", default=None, metavar="DIR",
                       help="output directory (writes files and manifest.txt)")
        return p

    p = sub("sample", cmd_sample, "sample a colouring and write config + PGM")
    _opt(p, "sample", "--lattice", _text, "Z2", "lattice id")
    _opt(p, "sample", "--P", _int, 997, "prime truncation cutoff")
    _opt(p, "sample", "--seed", _seed, 0, "master seed")
    _opt(p, "sample", "--origin", _ints, (0, 0), "window origin a,b")
    _opt(p, "sample", "--extents", _ints, (512, 512), "window extents e1,e2")
    _opt(p, "sample", "--oracle", _ints, None,
         "render the gcd oracle around point a,b instead of sampling")

    p = sub("layers", cmd_layers, "render per-prime coset layers as PPM")
    _opt(p, "layers", "--lattice", _text, "Z2", "lattice id")
    _opt(p, "layers", "--P", _int, 997, "prime truncation cutoff")
    _opt(p, "layers", "--seed", _seed, 0, "master seed")
    _opt(p, "layers", "--origin", _ints, (0, 0), "window origin a,b")
    _opt(p, "layers", "--extents", _ints, (256, 256), "window extents e1,e2")
    _opt(p, "layers", "--primes", _ints, (2, 3, 5), "up to 3 highlighted primes")

    p = sub("crossing", cmd_crossing, "Monte Carlo crossing probability")
    _opt(p, "crossing", "--n", _int, _REQUIRED, "window height (rows)")
    _opt(p, "crossing", "--x", _int, _REQUIRED, "window width (columns)")
    _opt(p, "crossing", "--trials", _int, 10000, "Monte Carlo trials")
    _opt(p, "crossing", "--P", _int, None,
         "prime truncation cutoff (default: 2x; truncation only raises the estimate)")
    _opt(p, "crossing", "--seed", _seed, 0, "master seed")
    _opt(p, "crossing", "--workers", _int, 1, "worker processes")

    p = sub("bounds", cmd_bounds, "second-moment crossing bound as CSV")
    _opt(p, "bounds", "--n", _int, _REQUIRED, "window height (rows)")
    _opt(p, "bounds", "--x", _int, _REQUIRED, "window width (columns)")
    _opt(p, "bounds", "--P", _int, None, "prime cutoff (default: 32x)")

    p = sub("annulus", cmd_annulus, "white-circuit frequency at scale k")
    _opt(p, "annulus", "--k", _int, _REQUIRED, "annulus scale, multiple of 3")
    _opt(p, "annulus", "--trials", _int, 200, "Monte Carlo trials")
    _opt(p, "annulus", "--P", _int, 997, "prime truncation cutoff")
    _opt(p, "annulus", "--seed", _seed, 0, "master seed")
    _opt(p, "annulus", "--workers", _int, 1, "worker processes")

    p = sub("staircase", cmd_staircase, "dyadic staircase frequency and path")
    _opt(p, "staircase", "--n-max", _int, 5, "last staircase stage")
    _opt(p, "staircase", "--trials", _int, 200, "Monte Carlo trials")
    _opt(p, "staircase", "--P", _int, 997, "prime truncation cutoff")
    _opt(p, "staircase", "--seed", _seed, 0, "master seed")
    _opt(p, "staircase", "--workers", _int, 1, "worker processes")

    p = sub("spanning", cmd_spanning, "all-white column frequency in dimension 3")
    _opt(p, "spanning", "--length", _int, 1000, "column length L")
    _opt(p, "spanning", "--trials", _int, 1000, "Monte Carlo trials")
    _opt(p, "spanning", "--P", _int, 997, "prime truncation cutoff")
    _opt(p, "spanning", "--seed", _seed, 0, "master seed")
    _opt(p, "spanning", "--workers", _int, 1, "worker processes")

    p = sub("clusters", cmd_clusters, "cluster statistics of one sample")
    _opt(p, "clusters", "--lattice", _text, "Z2", "lattice id")
    _opt(p, "clusters", "--P", _int, 997, "prime truncation cutoff")
    _opt(p, "clusters", "--seed", _seed, 0, "master seed")
    _opt(p, "clusters", "--origin", _ints, (0, 0), "window origin a,b")
    _opt(p, "clusters", "--extents", _ints, (256, 256), "window extents e1,e2")
    _opt(p, "clusters", "--adjacency", _text, "square", "generating set",
         choices=sorted(_ADJACENCIES))
    _opt(p, "clusters", "--colour", _text, "white", "which colour to label",
         choices=["white", "black"])

    p = sub("lattice", cmd_lattice, "minimal vectors and lattice facts")
    p.add_argument("action", choices=["dump", "info"],
                   help="dump sorted minimal vectors, or print summary facts")
    _SPECS.setdefault("lattice", {})["action"] = (_text, _REQUIRED)
    _opt(p, "lattice", "--lattice", _text, _REQUIRED, "lattice id")

    p = sub("golay", cmd_golay, "Golay code facts and word dumps")
    _opt(p, "golay", "--dump", _text, None,
         "word class to dump, one 24-bit word per line",
         choices=["generators", "codewords", "octads", "dodecads"])

    p = sub("check", cmd_check, "verify structural hypotheses for a model")
    _opt(p, "check", "--lattice", _text, _REQUIRED, "model to check",
         choices=sorted(_CHECK_TARGETS))
    _opt(p, "check", "--theorem", _text, _REQUIRED, "which condition set",
         choices=["setup", "setupblack"])
    _opt(p, "check", "--radius", _int, None,
         "slice certification radius (default: per lattice)")
    _opt(p, "check", "--search-radius", _int, None,
         "path search radius (default: twice the certification radius)")

    p = sub("infer", cmd_infer, "recover coset candidates from a PGM window")
    _opt(p, "infer", "--pgm", _text, _REQUIRED, "PGM colouring to analyse")
    _opt(p, "infer", "--p-max", _int, 13, "largest prime to solve for")

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
