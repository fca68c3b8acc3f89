"""Command-line front end.

Each subcommand reads a JSON spec file, runs one library operation and
writes a JSON report ``{command, verdict, certificates, warnings}``.
Complex numbers are written as ``[re, im]``; matrices are nested row-major.

Exit codes: 0 verdict computed (negative verdicts included), 2 unreadable or
malformed input, 3 input rejected by a library precondition, 4 two
independent numerical routes disagreed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import criteria, dilation, pdfun, reps
from .errors import ConsistencyError, NotPositiveError, PosDefError
from .groupcore import FiniteGroup, make_cyclic, make_dihedral, make_from_table, make_product, make_symmetric
from .linalg import DEFAULT_TOL, ToleranceConfig

SCHEMA_VERSIONS = ("1",)
PAYLOADS = ("function", "rep", "blocks")

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_CONSISTENCY = 0, 2, 3, 4


class SpecError(Exception):
    """Malformed spec file (exit code 2)."""


def _field(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SpecError(f"{where}: missing '{key}'")
    return obj[key]


# -- decoding ----------------------------------------------------------------

def _entry(x, where):
    if isinstance(x, bool):
        raise SpecError(f"{where}: booleans are not numbers")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                                   for v in x):
        return complex(x[0], x[1])
    raise SpecError(f"{where}: expected a number or [re, im], got {x!r}")


def decode_matrix(obj, where="matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SpecError(f"{where}: expected a non-empty list of rows")
    width = len(obj[0])
    if width == 0 or any(len(r) != width for r in obj):
        raise SpecError(f"{where}: rows must be non-empty and of equal length")
    return np.array([[_entry(x, where) for x in r] for r in obj], dtype=complex)


def decode_group(obj) -> FiniteGroup:
    if not isinstance(obj, dict) or "type" not in obj:
        raise SpecError("group: expected an object with a 'type'")
    kind = obj["type"]
    try:
        if kind == "cyclic":
            return make_cyclic(int(obj["n"]))
        if kind == "dihedral":
            return make_dihedral(int(obj["n"]))
        if kind == "symmetric":
            return make_symmetric(int(obj["n"]))
        if kind == "product":
            factors = obj["factors"]
            if not isinstance(factors, list) or len(factors) != 2:
                raise SpecError("group: 'product' needs exactly two factors")
            return make_product(decode_group(factors[0]), decode_group(factors[1]))
        if kind == "table":
            return make_from_table(np.array(obj["table"], dtype=np.int64), obj.get("labels"),
                                   obj.get("name", "G"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PosDefError):
            raise
        raise SpecError(f"group: {exc}") from exc
    raise SpecError(f"group: unknown type {kind!r}")


def _element_index(G: FiniteGroup, key) -> int:
    if key in G.labels:
        return G.labels.index(key)
    try:
        idx = int(key)
    except ValueError:
        raise SpecError(f"unknown group element {key!r}") from None
    if not 0 <= idx < G.order:
        raise SpecError(f"element index {idx} out of range")
    return idx


def decode_values(G: FiniteGroup, obj, where) -> np.ndarray:
    """A list indexed by element, or a mapping from element label (or index) to matrix."""
    if isinstance(obj, list):
        if len(obj) != G.order:
            raise SpecError(f"{where}: expected {G.order} matrices, got {len(obj)}")
        mats = [decode_matrix(m, f"{where}[{i}]") for i, m in enumerate(obj)]
    elif isinstance(obj, dict):
        mats = [None] * G.order
        for key, m in obj.items():
            mats[_element_index(G, key)] = decode_matrix(m, f"{where}[{key}]")
        missing = [G.labels[i] for i, m in enumerate(mats) if m is None]
        if missing:
            raise SpecError(f"{where}: no value for elements {missing}")
    else:
        raise SpecError(f"{where}: expected a list or an object")
    if len({m.shape for m in mats}) != 1:
        raise SpecError(f"{where}: all matrices must share one shape")
    return np.array(mats)


def decode_rep(G: FiniteGroup, obj) -> reps.UnitaryRep:
    if not isinstance(obj, dict):
        raise SpecError("rep: expected an object")
    if "U" in obj:
        return reps.UnitaryRep(G, decode_values(G, obj["U"], "rep.U"))
    builder = obj.get("builder")
    if builder == "permutation":
        rep = reps.permutation_rep(int(_field(obj, "n", "rep")))
    elif builder == "symmetric_commutative":
        rep = reps.build_symmetric_commutative(int(_field(obj, "n", "rep")),
                                               decode_matrix(_field(obj, "U0", "rep"), "rep.U0"))
    elif builder == "dihedral_commutative":
        Ur = decode_matrix(obj["Ur"], "rep.Ur") if "Ur" in obj else None
        rep = reps.build_dihedral_commutative(int(_field(obj, "n", "rep")),
                                              decode_matrix(_field(obj, "Us", "rep"), "rep.Us"), Ur)
    elif builder == "cyclic":
        rep = reps.build_cyclic_rep(G, decode_matrix(_field(obj, "U0", "rep"), "rep.U0"),
                                    generator=obj.get("generator"))
    else:
        raise SpecError(f"rep: unknown builder {builder!r}")
    if not rep.group.same_table(G):
        raise SpecError("rep: builder group does not match the spec's group")
    return reps.UnitaryRep(G, rep.U)


@dataclasses.dataclass
class Spec:
    raw: dict
    group: FiniteGroup | None
    cfg: ToleranceConfig
    seed: int

    def need(self, key):
        if key not in self.raw:
            raise SpecError(f"spec needs a '{key}' payload for this command")
        return self.raw[key]

    def function(self) -> pdfun.OperatorFunction:
        if self.group is None:
            raise SpecError("spec needs a 'group'")
        obj = self.need("function")
        vals = obj.get("values") if isinstance(obj, dict) else obj
        return pdfun.OperatorFunction(self.group, decode_values(self.group, vals, "function.values"))

    def rep(self) -> reps.UnitaryRep:
        if self.group is None:
            raise SpecError("spec needs a 'group'")
        return decode_rep(self.group, self.need("rep"))

    def blocks(self, *names) -> list[np.ndarray]:
        obj = self.need("blocks")
        if not isinstance(obj, dict):
            raise SpecError("blocks: expected an object")
        missing = [n for n in names if n not in obj]
        if missing:
            raise SpecError(f"blocks: missing {missing}")
        return [decode_matrix(obj[n], f"blocks.{n}") for n in names]


def load_spec(path: str | None, args) -> Spec:
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise SpecError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise SpecError("spec must be a JSON object")
        version = str(raw.get("schema_version", ""))
        if version not in SCHEMA_VERSIONS:
            raise SpecError(f"unsupported schema_version {version!r}; supported: {SCHEMA_VERSIONS}")
        present = [k for k in PAYLOADS if k in raw]
        if len(present) != 1:
            raise SpecError(f"spec must carry exactly one of {PAYLOADS}, found {present}")
    tol = dict(raw.get("tolerances", {}))
    if args.tol is not None:
        tol["psd_tol"] = args.tol
    try:
        cfg = ToleranceConfig(**tol) if tol else DEFAULT_TOL
    except TypeError as exc:
        raise SpecError(f"tolerances: {exc}") from exc
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    group = decode_group(raw["group"]) if "group" in raw else None
    return Spec(raw, group, cfg, seed)


# -- encoding ----------------------------------------------------------------

def to_jsonable(x):
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: to_jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)
                if not isinstance(getattr(x, f.name), FiniteGroup)}
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return to_jsonable(np.stack([x.real, x.imag], axis=-1).tolist())
        return to_jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [to_jsonable(x.real), to_jsonable(x.imag)]
    if isinstance(x, (float, np.floating)):
        x = float(x) + 0.0        # drops the sign of negative zero
        return x if math.isfinite(x) else None
    return x


def _psd_certificate(report, flat=None) -> dict:
    cert = {"verdict_tier": report.verdict, "min_eigenvalue": report.min_eigenvalue,
            "tolerance_used": report.tolerance_used, "eigenvalues": report.eigenvalues}
    if report.witness is not None:
        cert["witness"] = report.witness
    if flat is not None:
        cert["determinant"] = float(np.real(np.linalg.det(flat)))
    return cert


def _pd_verdict(report) -> str:
    return "positive" if report.is_psd else "indefinite"


def _criterion_result(r) -> tuple[str, dict, list]:
    cert = {"conditions": r.conditions, "quantities": r.quantities,
            "oracle": _psd_certificate(r.oracle), "factors": r.factors}
    return r.verdict, cert, list(r.notes)


# -- commands ------------------------------------------------------------------

def cmd_check_pd(spec, args):
    T = spec.function()
    rep = pdfun.is_positive_definite(T, spec.cfg)
    return _pd_verdict(rep), _psd_certificate(rep, pdfun.gram_block(T).flat), list(rep.notes)


def cmd_dilate(spec, args):
    T = spec.function()
    try:
        D = dilation.naimark_dilate(T, spec.cfg)
    except NotPositiveError as exc:
        return "not-positive-definite", {"min_eigenvalue": exc.report.min_eigenvalue}, [str(exc)]
    return "dilated", {"dim_k": D.dim_k, "V": D.V, "U": D.U, "residuals": D.residuals}, []


def cmd_verify_dilation(spec, args):
    """Either a function with a ``dilation`` payload, or a rep with ``V``.

    In the second form the rep is checked as a dilation of its own compression.
    """
    if "rep" in spec.raw:
        rep = spec.rep()
        V = decode_matrix(spec.need("V"), "V")
        T = dilation.compression(rep, V)
        U = rep.U
    else:
        T = spec.function()
        obj = spec.need("dilation")
        V = decode_matrix(_field(obj, "V", "dilation"), "dilation.V")
        U = np.array([decode_matrix(m, f"dilation.U[{i}]") for i, m in enumerate(_field(obj, "U", "dilation"))])
    D = dilation.NaimarkDilation(V, U, V.shape[0])
    r = dilation.verify_dilation(T, D, spec.cfg)
    return ("valid" if r.valid else "invalid"), {"residuals": r.residuals,
                                                 "converse_positive": r.converse_positive}, []


def cmd_compression(spec, args):
    rep = spec.rep()
    V = decode_matrix(spec.need("V"), "V")
    T = dilation.compression(rep, V)
    pd = pdfun.is_positive_definite(T, spec.cfg)
    return _pd_verdict(pd), {"values": T.values, "psd": _psd_certificate(pd)}, []


def cmd_power_pd(spec, args):
    T = spec.function()
    rep = pdfun.power_pd_check(T, args.n, spec.cfg)
    flat = pdfun.gram_block(pdfun.power_map(T, args.n)).flat
    return _pd_verdict(rep), {"n": args.n, **_psd_certificate(rep, flat)}, list(rep.notes)


def cmd_power_compat(spec, args):
    T = spec.function()
    D = dilation.naimark_dilate(T, spec.cfg)
    r = dilation.power_compatibility(T, D, args.n, spec.cfg)
    if not r.precondition_met:
        verdict = "precondition-failed"
    else:
        verdict = "compatible" if r.compatible else "incompatible"
    return verdict, r, list(r.notes)


def cmd_gamma(spec, args):
    """Factor ``[[A, B], [B*, C]]``; without ``C`` the block is ``[[A, B], [B, A]]``.

    In that symmetric form the ``+/-B <= A`` test is reported as well.
    """
    obj = spec.need("blocks")
    symmetric = isinstance(obj, dict) and "C" not in obj
    A, B = spec.blocks("A", "B")
    C = A if symmetric else spec.blocks("C")[0]
    g = criteria.gamma_factor(A, B, C, cfg=spec.cfg)
    cert = {"gamma": g.gamma, "norm": g.norm, "reconstruction_residual": g.reconstruction_residual,
            "is_contraction": g.is_contraction, "oracle": _psd_certificate(g.oracle)}
    notes = list(g.notes)
    if symmetric:
        pm = criteria.pm_criterion(A, B, cfg=spec.cfg)
        cert["pm"] = {"holds": pm.holds, "conditions": pm.conditions, "quantities": pm.quantities}
        notes.extend(pm.notes)
    return ("positive" if g.block_positive else "indefinite"), cert, notes


def cmd_three_by_three(spec, args):
    return _criterion_result(criteria.factor_3x3(*spec.blocks("A", "B", "R", "C", "Bp", "D"), cfg=spec.cfg))


def cmd_z2(spec, args):
    return _criterion_result(criteria.z2_criterion(*spec.blocks("T0", "T1"), cfg=spec.cfg, strict=args.strict))


def cmd_z3(spec, args):
    return _criterion_result(criteria.z3_criterion(*spec.blocks("T0", "T1"), cfg=spec.cfg, strict=args.strict))


def cmd_z4(spec, args):
    return _criterion_result(criteria.z4_criterion(*spec.blocks("T1", "T2"), cfg=spec.cfg))


def cmd_klein(spec, args):
    return _criterion_result(criteria.klein_criterion(*spec.blocks("T1", "T2", "T3"), cfg=spec.cfg))


def cmd_half_power(spec, args):
    (T,) = spec.blocks("T")
    hp = criteria.half_power(T, spec.cfg)
    return "computed", {"B": hp.B, "D_B": hp.D_B, "D_Bstar": hp.D_Bstar, "residuals": hp.residuals}, []


def cmd_z_trunc(spec, args):
    (P,) = spec.blocks("P")
    r = criteria.z_truncation(P, args.level, spec.cfg)
    return r.label, {"level": r.level, "identity_residual": r.identity_residual,
                     **_psd_certificate(r.report)}, []


def cmd_zz_trunc(spec, args):
    T1, T2 = spec.blocks("T1", "T2")
    r = criteria.zz_truncation(T1, T2, args.level, spec.cfg)
    return r.label, {"level": r.level, "structure_residual": r.identity_residual,
                     **_psd_certificate(r.report)}, []


def cmd_brehmer(spec, args):
    r = criteria.brehmer_check(*spec.blocks("T1", "T2"), cfg=spec.cfg, seed=spec.seed)
    cert = {"operator": r.operator, "T1_contraction": r.T1_contraction, "T2_contraction": r.T2_contraction,
            "quadratic_form_residual": r.quadratic_form_residual, "psd": _psd_certificate(r.report)}
    return ("passes" if r.passes else "fails"), cert, []


def cmd_doubly_commuting(spec, args):
    r = criteria.doubly_commuting_check(*spec.blocks("T1", "T2"), cfg=spec.cfg)
    verdict = "doubly-commuting" if r.doubly_commuting else ("commuting" if r.commuting else "not-commuting")
    return verdict, r, []


def cmd_rep_verify(spec, args):
    r = reps.verify_rep(spec.rep(), spec.cfg)
    return ("representation" if r.valid else "not-a-representation"), r, []


def cmd_rep_structure(spec, args):
    rep = spec.rep()
    S = reps.structure_decompose(rep, spec.cfg, seed=spec.seed)
    cert = {"k": S.k, "projections": S.projections, "exponents": S.exponents,
            "characters": S.characters, "spectra_match": reps.spectra_match(rep, S, spec.cfg)}
    return "decomposed", cert, []


def cmd_rep_power(spec, args):
    r = reps.power_rep_check(spec.rep(), args.n, spec.cfg)
    return ("representation" if r.is_representation else "not-a-representation"), r, []


def cmd_counterexample_det(spec, args):
    value = criteria.counterexample_det(args.n)
    numeric = float(np.linalg.det(criteria.counterexample_block(args.n)))
    return ("negative" if value < 0 else "nonnegative"), {"n": args.n, "closed_form": value,
                                                          "numeric": numeric}, []


COMMANDS = {
    "check-pd": cmd_check_pd,
    "dilate": cmd_dilate,
    "verify-dilation": cmd_verify_dilation,
    "compression": cmd_compression,
    "power-pd": cmd_power_pd,
    "power-compat": cmd_power_compat,
    "gamma": cmd_gamma,
    "three-by-three": cmd_three_by_three,
    "z2": cmd_z2,
    "z3": cmd_z3,
    "z4": cmd_z4,
    "klein": cmd_klein,
    "half-power": cmd_half_power,
    "z-trunc": cmd_z_trunc,
    "zz-trunc": cmd_zz_trunc,
    "brehmer": cmd_brehmer,
    "doubly-commuting": cmd_doubly_commuting,
    "rep-verify": cmd_rep_verify,
    "rep-structure": cmd_rep_structure,
    "rep-power": cmd_rep_power,
    "counterexample-det": cmd_counterexample_det,
}
NO_SPEC = {"counterexample-det"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="posdefgroup", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name in NO_SPEC:
            p.add_argument("spec", nargs="?", help="optional spec file (unused)")
        else:
            p.add_argument("spec", help="JSON spec file")
        p.add_argument("--tol", type=float, help="override psd_tol")
        p.add_argument("--seed", type=int, help="override the spec's seed")
        p.add_argument("--level", type=int, default=1, help="truncation level")
        p.add_argument("--n", type=int, default=2, help="power or n for counterexample-det")
        p.add_argument("--strict", action="store_true", help="strict-positivity form (z2, z3)")
        p.add_argument("--out", help="write the report here instead of stdout")
    return parser


def run(argv=None) -> tuple[int, dict, str | None]:
    """Parse ``argv``, execute the command and return ``(exit code, report, output path)``."""
    args = build_parser().parse_args(argv)
    report = {"command": args.command, "verdict": "error", "certificates": {}, "warnings": []}
    try:
        spec = load_spec(None if args.command in NO_SPEC else args.spec, args)
        verdict, cert, warnings = COMMANDS[args.command](spec, args)
        report.update(verdict=verdict, certificates=to_jsonable(cert), warnings=list(warnings))
        code = EXIT_OK
    except SpecError as exc:
        report["warnings"] = [f"parse error: {exc}"]
        code = EXIT_PARSE
    except ConsistencyError as exc:
        report["warnings"] = [f"consistency error: {exc}"]
        code = EXIT_CONSISTENCY
    except (PosDefError, ValueError) as exc:
        report["warnings"] = [f"validation error: {type(exc).__name__}: {exc}"]
        code = EXIT_VALIDATION
    return code, report, args.out


def main(argv=None) -> int:
    code, report, out = run(argv)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    if code:
        sys.stderr.write(report["warnings"][0] + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
