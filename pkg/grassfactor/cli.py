"""grassfactor command-line interface.

stdout carries JSON documents only; diagnostics go to stderr. Exit codes:
0 success, 1 I/O or parse error, 2 validation failure, 3 non-generic or
unsupported input.
"""

import json
import logging
import sys
from enum import Enum
from pathlib import Path

import typer
from loguru import logger

from grassfactor.config import settings
from grassfactor.decompose import (
    Factorization,
    decompose_so,
    decompose_so_minus,
    decompose_su,
    decompose_su_kkkk2,
    decompose_su_minus,
    decompose_su_signature,
)
from grassfactor.documents import MatrixDocument, dump, factorization_document, load_matrices
from grassfactor.errors import BadSignature, DocumentError, GrassfactorError
from grassfactor.grassmann import GrassPoint, group_sample, gr_sample, gr_validate, infer_k
from grassfactor.phi import PhiSignature, classify_phi4_complex, member_phi2, phi_dim, reflection_length
from grassfactor.symplectic import (
    SpGrassPoint,
    SymplecticMatrix,
    decompose_sp_four,
    psi1,
    psi2,
    sp_sample,
    spgr_from_conjugation,
    spgr_validate,
)

app = typer.Typer(
    help="Factor matrices into products of Grassmannian involutions.",
    add_completion=False,
    no_args_is_help=True,
)


class Group(str, Enum):
    so = "so"
    so_minus = "so-"
    su = "su"
    su_minus = "su-"
    su_sig = "su-sig"
    su_kkkk2 = "su-kkkk2"
    sp = "sp"


class Model(str, Enum):
    gr = "gr"
    grsp = "grsp"


class FieldChoice(str, Enum):
    real = "real"
    complex = "complex"


class SampleKind(str, Enum):
    gr = "gr"
    grsp = "grsp"
    so = "so"
    so_minus = "so-"
    su = "su"
    su_minus = "su-"
    sp = "sp"


class Stage(str, Enum):
    psi1 = "psi1"
    psi2 = "psi2"


# ─── Plumbing ────────────────────────────────────────────────────────────────

@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug diagnostics on stderr")):
    level = "DEBUG" if verbose else "INFO"
    logger.remove()
    logger.add(sys.stderr, level=level, format="<level>{level: <8}</level> | {message}")
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, stream=sys.stderr, force=True)
    invalid = settings.validate()
    if invalid:
        logger.error(f"Invalid configuration: {', '.join(invalid)}")
        raise typer.Exit(code=1)


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e.strerror}") from e


def _emit(text: str) -> None:
    typer.echo(text)


def _fail(e: GrassfactorError) -> typer.Exit:
    logger.error(f"{e.__class__.__name__}: {e}")
    return typer.Exit(code=e.exit_code)


def _parse_signature(raw: str | None, count: int | None = None) -> tuple[int, ...]:
    if raw is None:
        raise BadSignature("--signature is required")
    try:
        ks = tuple(int(x) for x in raw.split(","))
    except ValueError as e:
        raise BadSignature(f"cannot parse signature {raw!r}") from e
    if count is not None and len(ks) != count:
        raise BadSignature(f"expected {count} entries, got {len(ks)}")
    return ks


# ─── Commands ────────────────────────────────────────────────────────────────

def _decompose_one(group: Group, doc: MatrixDocument, tol: float | None, seed: int,
                   signature: str | None) -> Factorization:
    m = doc.to_array()
    if group is Group.so:
        return decompose_so(m, tol)
    if group is Group.so_minus:
        return decompose_so_minus(m, tol)
    if group is Group.su:
        return decompose_su(m, tol)
    if group is Group.su_minus:
        return decompose_su_minus(m, tol)
    if group is Group.su_sig:
        return decompose_su_signature(m, _parse_signature(signature, 4), tol)
    if group is Group.su_kkkk2:
        return decompose_su_kkkk2(m, tol)
    x = SymplecticMatrix(field=doc.field, n=doc.rows // 2, m=m)
    return decompose_sp_four(x, tol, seed)


@app.command()
def decompose(
    group: Group = typer.Option(..., "--group", help="Target group / construction"),
    input_path: str = typer.Option("-", "--in", help="MatrixDocument file, or - for stdin"),
    tol: float | None = typer.Option(None, "--tol", help="Residual tolerance (default GRASSFACTOR_TOL)"),
    seed: int = typer.Option(0, "--seed"),
    signature: str | None = typer.Option(None, "--signature", help="k1,k2,k3,k4 for su-sig"),
):
    """Factor a matrix into Grassmannian involutions."""
    try:
        docs, batch = load_matrices(_read(input_path))
        results = []
        for i, doc in enumerate(docs):
            f = _decompose_one(group, doc, tol, seed, signature)
            logger.info(f"[{i}] {f.group}: half-ranks={list(f.ks)} residual={f.residual:.3e}")
            results.append(factorization_document(f))
    except GrassfactorError as e:
        raise _fail(e) from e
    _emit(dump(results if batch else results[0]))


@app.command()
def verify(
    model: Model = typer.Option(..., "--model"),
    k: int = typer.Option(..., "--k"),
    input_path: str = typer.Option("-", "--in"),
    tol: float | None = typer.Option(None, "--tol"),
):
    """Check a matrix against the Gr or Gr_Sp involution model."""
    try:
        docs, batch = load_matrices(_read(input_path))
        check = gr_validate if model is Model.gr else spgr_validate
        reports = [check(doc.to_array(), k, tol) for doc in docs]
    except GrassfactorError as e:
        raise _fail(e) from e
    _emit(dump(reports if batch else reports[0]))
    if not all(r.accepted for r in reports):
        logger.warning("Matrix rejected by the involution model")
        raise typer.Exit(code=2)


@app.command()
def member(
    field: FieldChoice = typer.Option(..., "--field"),
    k: int = typer.Option(..., "--k"),
    kprime: int = typer.Option(..., "--kprime"),
    input_path: str = typer.Option("-", "--in"),
    tol: float | None = typer.Option(None, "--tol"),
):
    """Decide membership in Φ(k, k′)."""
    try:
        docs, _ = load_matrices(_read(input_path))
        answer = member_phi2(docs[0].to_array(), k, kprime, field.value, tol)
    except GrassfactorError as e:
        raise _fail(e) from e
    _emit(json.dumps({"member": bool(answer)}))


@app.command()
def dim(
    field: FieldChoice = typer.Option(..., "--field"),
    k: int = typer.Option(..., "--k"),
    kprime: int = typer.Option(..., "--kprime"),
    n: int = typer.Option(..., "--n"),
):
    """Real dimension of Φ(k, k′, Fⁿ)."""
    try:
        value = phi_dim(field.value, k, kprime, n)
    except GrassfactorError as e:
        raise _fail(e) from e
    _emit(json.dumps({"dim": int(value)}))


@app.command()
def length(
    input_path: str = typer.Option("-", "--in"),
    tol: float | None = typer.Option(None, "--tol"),
):
    """Reflection length of a matrix with determinant ±1."""
    try:
        docs, _ = load_matrices(_read(input_path))
        value = reflection_length(docs[0].to_array(), tol)
    except GrassfactorError as e:
        raise _fail(e) from e
    _emit(json.dumps({"length": int(value)}))


@app.command()
def classify(
    signature: str = typer.Option(..., "--signature", help="k1,k2,k3,k4"),
    n: int = typer.Option(..., "--n"),
):
    """Which of SU(n), SU⁻(n) a four-factor product fills over ℂ."""
    try:
        ks = _parse_signature(signature, 4)
        value = classify_phi4_complex(PhiSignature(field="complex", n=n, ks=ks))
    except GrassfactorError as e:
        raise _fail(e) from e
    _emit(json.dumps({"class": value.value}))


@app.command()
def sample(
    kind: SampleKind = typer.Option(..., "--kind"),
    n: int = typer.Option(..., "--n"),
    k: int = typer.Option(0, "--k"),
    field: FieldChoice = typer.Option(FieldChoice.real, "--field"),
    seed: int = typer.Option(0, "--seed"),
):
    """Deterministic sample, written as a MatrixDocument."""
    try:
        if kind is SampleKind.gr:
            m = gr_sample(field.value, k, n, seed).m
        elif kind is SampleKind.grsp:
            m = spgr_from_conjugation(sp_sample(field.value, n, seed), k).m
        elif kind is SampleKind.sp:
            m = sp_sample(field.value, n, seed).m
        else:
            m = group_sample(kind.value, n, seed)
    except GrassfactorError as e:
        raise _fail(e) from e
    out_field = "real" if kind in (SampleKind.so, SampleKind.so_minus) else \
        "complex" if kind in (SampleKind.su, SampleKind.su_minus) else field.value
    _emit(dump(MatrixDocument.from_array(m, out_field)))


@app.command()
def embed(
    stage: Stage = typer.Option(Stage.psi1, "--to"),
    k: int | None = typer.Option(None, "--k", help="Half-rank / rank; inferred from the trace if omitted"),
    input_path: str = typer.Option("-", "--in"),
):
    """psi1: Gr(k, ℂⁿ) → Gr_Sp(2k, ℝ²ⁿ); psi2: Gr_Sp(2k, ℝ²ⁿ) → Gr(2k, ℝ²ⁿ)."""
    try:
        docs, _ = load_matrices(_read(input_path))
        m = docs[0].to_array()
        if stage is Stage.psi1:
            kk = infer_k(m) if k is None else k
            out = psi1(GrassPoint(field="complex", n=m.shape[0], k=kk, m=m.astype(complex))).m
            field = "real"
        else:
            n = m.shape[0] // 2
            kk = int(round((m.trace().real + 2 * n) / 4)) if k is None else k
            out = psi2(SpGrassPoint(field=docs[0].field, n=n, k=kk, m=m)).m
            field = docs[0].field
    except GrassfactorError as e:
        raise _fail(e) from e
    _emit(dump(MatrixDocument.from_array(out, field)))
