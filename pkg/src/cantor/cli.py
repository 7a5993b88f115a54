"""Batch front-end: ``cantor <command> --spec FILE [--out FILE] [--format json|csv]``.

Reports are deterministic (sorted keys, no timestamps); run metadata goes to a
``<out>.meta.json`` sidecar.  Exit status is 0 on success, 1 on bad input and
2 when a mathematical hypothesis fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .approximation import (
    COR22,
    LINEAR_FORM_NOTE,
    PROP23,
    PROP23_REMARK,
    THM21_FIRST,
    THM21_SECOND,
    IntSequence,
    build_approximant,
    check_prop23,
    check_theorem21,
    corollary22_spec,
    find_repetition,
    make_witness,
    schmidt_triples,
)
from .errors import CantorError, SpecParseError
from .numeration import DigitVector, RadixSequence, find_sparse_multiple, from_digits, to_digits
from .product_engine import (
    ProductSpec,
    boundedness_report,
    copy_structure,
    evaluate,
    expand,
)
from .tm_words import (
    TMSpec,
    build_word,
    letter,
    periodicity_witness,
    subsequence_period_scan,
    subsequence_value,
    to_product_spec,
)
from .values import UnitRoot, fraction_str, materialize, parse_fraction, value_to_json


class InputError(CantorError):
    code = "BAD_ARGUMENTS"


def _rational(text: str) -> Fraction:
    try:
        return parse_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


# command -> list of (flag, argparse kwargs)
_COMMANDS: dict[str, list[tuple[str, dict]]] = {
    "digits": [("--value", {"type": int}), ("--digits", {"type": str})],
    "sparse-multiple": [("--l", {"type": int, "required": True}),
                        ("--t", {"type": int, "required": True}),
                        ("--search-cap", {"type": int, "default": 10**6})],
    "expand": [("--N", {"type": int, "required": True})],
    "tail-expand": [("--n", {"type": int, "required": True}),
                    ("--N", {"type": int, "required": True})],
    "copy-structure": [("--n", {"type": int, "required": True}),
                       ("--num-blocks", {"type": int, "required": True})],
    "evaluate": [("--b", {"type": int, "required": True}),
                 ("--target-error", {"type": _rational, "default": Fraction(1, 10**30)})],
    "bounded-report": [("--n-max", {"type": int, "required": True}),
                       ("--m-max", {"type": int, "required": True})],
    "witness": [("--n", {"type": int, "required": True}), ("--L", {"type": int, "default": 1})],
    "approximant": [("--n", {"type": int, "required": True}), ("--L", {"type": int, "default": 1}),
                    ("--s", {"type": int}), ("--t", {"type": int})],
    "check-thm21": [("--b", {"type": int, "required": True}),
                    ("--epsilon", {"type": _rational, "required": True}),
                    ("--variant", {"choices": ["first", "second"], "default": "first"}),
                    ("--n-range", {"type": int, "nargs": 2, "required": True}),
                    ("--L", {"type": int, "default": 1})],
    "check-prop23": [("--b", {"type": int, "required": True}),
                     ("--c", {"type": int, "required": True}),
                     ("--epsilon", {"type": _rational, "required": True}),
                     ("--variant", {"choices": ["main", "remark"], "default": "main"}),
                     ("--y-range", {"type": int, "nargs": 2, "required": True})],
    "cor22": [("--b0", {"type": int, "default": 2}), ("--b", {"type": int}),
              ("--epsilon", {"type": _rational}), ("--n-range", {"type": int, "nargs": 2})],
    "schmidt-report": [("--b", {"type": int, "required": True}),
                       ("--n-range", {"type": int, "nargs": 2, "required": True}),
                       ("--L", {"type": int, "default": 1})],
    "tm-build": [("--n", {"type": int, "required": True}),
                 ("--block", {"type": int, "default": 0})],
    "tm-letter": [("--m", {"type": int, "required": True})],
    "tm-period": [("--depth", {"type": int, "default": 64})],
    "tm-subseq-value": [("--N", {"type": int, "default": 0}), ("--l", {"type": int, "default": 1}),
                        ("--b", {"type": int, "required": True}),
                        ("--target-error", {"type": _rational, "default": Fraction(1, 10**15)})],
    "tm-subseq-scan": [("--N", {"type": int, "default": 0}), ("--l", {"type": int, "default": 1}),
                       ("--max-period", {"type": int, "default": 64}),
                       ("--horizon", {"type": int, "default": 8192})],
    "tm-to-product": [("--rational", {"action": "store_true"})],
}

_NO_SPEC = {"cor22"}


@dataclass
class RunConfig:
    command: str
    spec_path: str | None = None
    params: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "json"

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {"command", "spec_path", "params", "out", "format"}
        extra = set(data) - known
        if extra:
            raise InputError(f"unknown config keys {sorted(extra)}")
        if data.get("command") not in _COMMANDS:
            raise InputError(f"unknown command {data.get('command')!r}")
        cfg = cls(data["command"], data.get("spec_path"), dict(data.get("params", {})),
                  data.get("out"), data.get("format", "json"))
        flags = {flag.lstrip("-").replace("-", "_"): kw for flag, kw in _COMMANDS[cfg.command]}
        bad = set(cfg.params) - set(flags)
        if bad:
            raise InputError(f"unknown parameters for {cfg.command}: {sorted(bad)}")
        for key, kw in flags.items():
            if key not in cfg.params:
                if kw.get("required"):
                    raise InputError(f"{cfg.command} needs parameter {key!r}")
                cfg.params[key] = kw.get("default", False if kw.get("action") else None)
        for key in ("epsilon", "target_error"):
            if key in cfg.params:
                cfg.params[key] = parse_fraction(cfg.params[key])
        return cfg


def _load_json(path: str | None):
    if path is None:
        raise SpecParseError("this command needs --spec")
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecParseError(f"cannot read spec {path}: {exc}") from exc


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _coeff_rows(values) -> tuple[list[str], list[list]]:
    if values and isinstance(values[0], UnitRoot):
        return ["m", "residue"], [[m, v.residue] for m, v in enumerate(values)]
    rows = []
    for m, v in enumerate(values):
        v = materialize(v)
        rows.append([m, str(v.numerator), str(v.denominator)])
    return ["m", "num", "den"], rows


def _float_str(x) -> str:
    return "" if x is None else f"{x:.12g}"


def _execute(cfg: RunConfig) -> tuple[str, int]:
    """Run one command; returns (report text, exit status)."""
    p = cfg.params
    cmd = cfg.command
    fmt = cfg.format
    data = None if cmd in _NO_SPEC else _load_json(cfg.spec_path)
    status = 0

    def product() -> ProductSpec:
        return ProductSpec.from_json(data)

    def tm() -> TMSpec:
        return TMSpec.from_json(data)

    if cmd == "digits":
        radix = RadixSequence.from_json(data)
        if p.get("value") is not None:
            d = to_digits(p["value"], radix)
            report = {"value": str(p["value"]), "digits": d.to_json()}
        elif p.get("digits") is not None:
            try:
                d = DigitVector.from_pairs(json.loads(p["digits"]))
            except (json.JSONDecodeError, TypeError, ValueError) as exc:
                raise InputError(f"bad --digits: {exc}") from exc
            report = {"value": str(from_digits(d, radix)), "digits": d.to_json()}
        else:
            raise InputError("digits needs --value or --digits")
        if fmt == "csv":
            return _csv(["y", "s"], report["digits"]), 0
    elif cmd == "sparse-multiple":
        radix = RadixSequence.from_json(data)
        x = find_sparse_multiple(p["l"], p["t"], radix, p["search_cap"])
        report = {"x": x, "n": str(x * p["l"]), "digits": to_digits(x * p["l"], radix).to_json()}
    elif cmd in ("expand", "tail-expand"):
        values = expand(product(), p.get("n", 0), p["N"])
        header, rows = _coeff_rows(values)
        if fmt == "csv":
            return _csv(header, rows), 0
        report = {"n": p.get("n", 0), "coefficients": [value_to_json(v) for v in values]}
    elif cmd == "copy-structure":
        scalars = copy_structure(product(), p["n"], p["num_blocks"])
        report = {"n": p["n"], "scalars": [value_to_json(v) for v in scalars]}
    elif cmd == "evaluate":
        iv = evaluate(product(), p["b"], p["target_error"])
        report = {"b": p["b"], "interval": iv.to_json(), "width": fraction_str(iv.width)}
    elif cmd == "bounded-report":
        report = boundedness_report(product(), p["n_max"], p["m_max"]).to_json()
    elif cmd == "witness":
        report = find_repetition(product(), p["n"], p["L"]).to_json()
    elif cmd == "approximant":
        spec = product()
        if p.get("s") is not None:
            w = make_witness(spec, p["n"], p["s"], p.get("t") or 0, p["L"])
        else:
            w = find_repetition(spec, p["n"], p["L"])
        report = build_approximant(spec, w).to_json()
    elif cmd == "check-thm21":
        variant = THM21_FIRST if p["variant"] == "first" else THM21_SECOND
        rep = check_theorem21(product(), p["b"], p["epsilon"], variant, tuple(p["n_range"]), p["L"])
        report = rep.to_json()
        status = 0 if rep.all_hold else 2
    elif cmd == "check-prop23":
        try:
            f_rule, F_rule = IntSequence.from_json(data["f"]), IntSequence.from_json(data["F"])
        except (KeyError, TypeError) as exc:
            raise SpecParseError("prop23 spec needs 'f' and 'F' sequences") from exc
        variant = PROP23 if p["variant"] == "main" else PROP23_REMARK
        rep = check_prop23(f_rule, F_rule, p["b"], p["c"], p["epsilon"], variant, tuple(p["y_range"]))
        report = rep.to_json()
        status = 0 if rep.all_hold else 2
    elif cmd == "cor22":
        spec = corollary22_spec(p.get("b0", 2))
        if p.get("b") is None:
            report = spec.to_json()
        else:
            if p.get("epsilon") is None or p.get("n_range") is None:
                raise InputError("cor22 with --b also needs --epsilon and --n-range")
            rep = check_theorem21(spec, p["b"], p["epsilon"], COR22, tuple(p["n_range"]))
            report = rep.to_json()
            status = 0 if rep.all_hold else 2
    elif cmd == "schmidt-report":
        triples = schmidt_triples(product(), p["b"], tuple(p["n_range"]), p["L"])
        if fmt == "csv":
            rows = [[t.n, _float_str(t.log2_linear_form), _float_str(t.log2_height),
                     _float_str(t.decay_ratio)] for t in triples]
            return _csv(["n", "log_linear_form", "log_height", "ratio"], rows), 0
        report = {"triples": [t.to_json() for t in triples], "evidence": {"note": LINEAR_FORM_NOTE}}
    elif cmd == "tm-build":
        word = build_word(tm(), p["n"])
        if fmt == "text":
            return word.to_text(p["block"] or None), 0
        if fmt == "csv":
            return _csv(["index", "letter"], [[i, x] for i, x in enumerate(word.letters)]), 0
        report = {"n": p["n"], "L": word.L, "letters": list(word.letters)}
    elif cmd == "tm-letter":
        report = {"m": str(p["m"]), "letter": letter(tm(), p["m"])}
    elif cmd == "tm-period":
        report = periodicity_witness(tm(), p["depth"]).to_json()
    elif cmd == "tm-subseq-value":
        value = subsequence_value(tm(), p["N"], p["l"], p["b"], p["target_error"])
        report = {"N": p["N"], "l": p["l"], "b": p["b"], "value": value.to_json()}
    elif cmd == "tm-subseq-scan":
        report = subsequence_period_scan(tm(), p["N"], p["l"], p["max_period"], p["horizon"]).to_json()
    elif cmd == "tm-to-product":
        report = to_product_spec(tm(), rational=p.get("rational", False)).to_json()
    else:  # pragma: no cover - guarded by RunConfig
        raise InputError(f"unknown command {cmd!r}")
    if fmt != "json":
        raise InputError(f"format {fmt!r} is not available for {cmd}")
    return json.dumps(report, sort_keys=True, indent=2) + "\n", status


def _write(cfg: RunConfig, text: str, argv: list[str] | None) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
        return
    Path(cfg.out).write_text(text)
    meta = {"version": __version__, "command": cfg.command, "argv": argv or [],
            "finished": datetime.now(timezone.utc).isoformat()}
    Path(cfg.out + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def run(cfg: RunConfig, argv: list[str] | None = None) -> int:
    try:
        text, status = _execute(cfg)
    except CantorError as exc:
        text = json.dumps({"error": {"code": exc.code, "message": str(exc)}},
                          sort_keys=True, indent=2) + "\n"
        status = exc.exit_status
    except (ValueError, ZeroDivisionError) as exc:
        text = json.dumps({"error": {"code": "BAD_ARGUMENTS", "message": str(exc)}},
                          sort_keys=True, indent=2) + "\n"
        status = 1
    _write(cfg, text, argv)
    return status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cantor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, flags in _COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--spec", dest="spec_path")
        sp.add_argument("--out")
        sp.add_argument("--format", choices=["json", "csv", "text"], default="json")
        for flag, kwargs in flags:
            sp.add_argument(flag, dest=flag.lstrip("-").replace("-", "_"), **kwargs)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = build_parser().parse_args(argv)
    except InputError as exc:
        sys.stderr.write(json.dumps({"error": {"code": exc.code, "message": str(exc)}}) + "\n")
        return 1
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "spec_path", "out", "format")}
    cfg = RunConfig(ns.command, ns.spec_path, params, ns.out, ns.format)
    return run(cfg, argv)


if __name__ == "__main__":
    sys.exit(main())
