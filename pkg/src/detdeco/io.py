"""CSV and JSON interchange formats.

CSV files open with ``# key=<json>`` comment lines carrying provenance,
followed by a header row. JSON documents carry the same information under a
``provenance`` key. Floats in CSV use 12 significant digits; JSON keeps the
full double repr so tables round-trip exactly.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .decoherence import NegativityCurve, Threshold
from .detectors import DetectorKind, DiagonalPovm
from .errors import DomainError
from .fock import WIGNER_CONVENTION, WignerSection
from .herald import HeraldedState
from .tomography import ClickRecord, FitReport


def provenance(seed=None, **parameters) -> dict:
    return {
        "package": "detdeco",
        "version": __version__,
        "wigner_convention": WIGNER_CONVENTION,
        "seed": seed,
        "parameters": parameters,
    }


def _fmt(v) -> str:
    # shortest string that reads back to the same double
    return repr(float(v))


def _write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _csv_text(comments: dict, header, rows) -> str:
    buf = io.StringIO()
    for key, value in comments.items():
        buf.write(f"# {key}={json.dumps(value, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _read_csv(path):
    comments, lines = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            comments[key] = json.loads(value)
        elif line.strip():
            lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    return comments, header, list(reader)


# -- Wigner sections ---------------------------------------------------------

def write_section_csv(section: WignerSection, path, prov: dict | None = None) -> None:
    rows = [(_fmt(r), _fmt(w)) for r, w in zip(section.radii, section.values)]
    _write_text(path, _csv_text({"provenance": prov or provenance()}, ["r", section.label], rows))


def read_section_csv(path) -> WignerSection:
    _, header, rows = _read_csv(path)
    if len(header) != 2 or header[0] != "r":
        raise DomainError(f"{path}: expected header 'r,w' or 'r,w_c'")
    data = np.array(rows, dtype=float).reshape(-1, 2)
    return WignerSection(data[:, 0], data[:, 1], header[1])


# -- click records -----------------------------------------------------------

def write_record_csv(record: ClickRecord, path, prov: dict | None = None) -> None:
    rows = [
        (_fmt(mu), n, int(record.counts[j, n]), record.pulses_per_point)
        for j, mu in enumerate(record.intensities)
        for n in range(record.outcomes)
    ]
    prov = prov or provenance(record.seed, **record.meta)
    comments = {"provenance": prov, "seed": record.seed, "meta": record.meta}
    _write_text(path, _csv_text(comments, ["mu", "n", "count", "pulses"], rows))


def read_record_csv(path) -> ClickRecord:
    comments, header, rows = _read_csv(path)
    if header != ["mu", "n", "count", "pulses"]:
        raise DomainError(f"{path}: expected header 'mu,n,count,pulses'")
    mus, index = [], {}
    pulses = set()
    for mu, n, count, p in rows:
        mu = float(mu)
        if not mus or mus[-1] != mu:
            mus.append(mu)
        index[(len(mus) - 1, int(n))] = int(count)
        pulses.add(int(p))
    if len(pulses) != 1:
        raise DomainError(f"{path}: pulses per point must be constant")
    outcomes = max(n for _, n in index) + 1
    counts = np.zeros((len(mus), outcomes), dtype=np.int64)
    for (j, n), c in index.items():
        counts[j, n] = c
    return ClickRecord(np.array(mus), counts, pulses.pop(), comments.get("seed"), comments.get("meta", {}))


# -- negativity curves and thresholds ---------------------------------------

def write_curve_csv(curve: NegativityCurve, path, prov: dict | None = None) -> None:
    rows = [(_fmt(nu), _fmt(w), curve.source) for nu, w in zip(curve.nu_grid, curve.origin_values)]
    comments = {
        "provenance": prov or provenance(),
        "kind": None if curve.kind is None else curve.kind.value,
        "eta": curve.eta,
    }
    _write_text(path, _csv_text(comments, ["nu", "w_origin", "source"], rows))


def read_curve_csv(path) -> NegativityCurve:
    comments, header, rows = _read_csv(path)
    if header != ["nu", "w_origin", "source"]:
        raise DomainError(f"{path}: expected header 'nu,w_origin,source'")
    sources = {row[2] for row in rows}
    if len(sources) != 1:
        raise DomainError(f"{path}: mixed curve sources {sorted(sources)}")
    data = np.array([row[:2] for row in rows], dtype=float)
    return NegativityCurve(data[:, 0], data[:, 1], sources.pop(), comments.get("kind"), comments.get("eta"))


def threshold_to_dict(th: Threshold, prov: dict | None = None) -> dict:
    doc = {
        "kind": th.kind.value,
        "eta": th.eta,
        "nu_star_exact": th.nu_star_exact,
        "nu_star_bisect": th.nu_star_bisect,
    }
    if th.nu_star_empirical is not None:
        doc["nu_star_empirical"] = th.nu_star_empirical
    doc["provenance"] = prov or provenance(kind=th.kind.value, eta=th.eta)
    return doc


def threshold_from_dict(doc: dict) -> Threshold:
    return Threshold(DetectorKind(doc["kind"]), doc["eta"], doc["nu_star_exact"],
                     doc["nu_star_bisect"], doc.get("nu_star_empirical"))


# -- POVMs and fits ------------------------------------------------------------

def povm_to_dict(povm: DiagonalPovm, prov: dict | None = None) -> dict:
    doc = {
        "kind": None if povm.kind is None else povm.kind.value,
        "eta": povm.eta,
        "nu": povm.nu,
        "L": povm.L,
        "outcomes": povm.outcomes,
        "labels": list(povm.labels),
        "source": povm.source,
        "meta": povm.meta,
        "table": povm.table.tolist(),
    }
    if prov is not None:
        doc["provenance"] = prov
    return doc


def povm_from_dict(doc: dict) -> DiagonalPovm:
    table = np.array(doc["table"], dtype=float)
    if table.shape != (doc["L"] + 1, doc["outcomes"]):
        raise DomainError("POVM table shape does not match L and outcomes")
    return DiagonalPovm(table, doc.get("kind"), doc.get("eta"), doc.get("nu"),
                        doc.get("source", "analytic"), doc.get("meta", {}))


def fit_to_dict(fit: FitReport, prov: dict | None = None) -> dict:
    return {
        "povm": povm_to_dict(fit.povm),
        "iterations": fit.iterations,
        "converged": fit.converged,
        "outcome": fit.outcome,
        "origin_value": fit.origin_value,
        "origin_halfwidth": fit.origin_halfwidth,
        "warnings": list(fit.warnings),
        "seed": fit.seed,
        "loglik_trace": np.asarray(fit.loglik_trace).tolist(),
        "provenance": prov or provenance(fit.seed),
    }


def fit_from_dict(doc: dict) -> FitReport:
    return FitReport(
        povm=povm_from_dict(doc["povm"]),
        loglik_trace=np.array(doc["loglik_trace"], dtype=float),
        iterations=doc["iterations"],
        converged=doc["converged"],
        origin_value=doc["origin_value"],
        origin_halfwidth=doc.get("origin_halfwidth", 0.0),
        outcome=doc.get("outcome", 1),
        warnings=list(doc.get("warnings", [])),
        seed=doc.get("seed"),
    )


# -- heralded states -------------------------------------------------------------

def state_to_dict(state: HeraldedState, prov: dict | None = None) -> dict:
    doc = {
        "lambda": state.meta.get("lambda"),
        "detector": state.meta.get("detector"),
        "outcome": state.meta.get("outcome"),
        "weights": state.weights.tolist(),
        "herald_probability": state.herald_probability,
    }
    extra = {k: v for k, v in state.meta.items() if k not in ("lambda", "detector", "outcome")}
    if extra:
        doc["meta"] = extra
    doc["provenance"] = prov or provenance()
    return doc


def state_from_dict(doc: dict) -> HeraldedState:
    meta = {"detector": doc.get("detector"), "outcome": doc.get("outcome"), "lambda": doc.get("lambda")}
    meta.update(doc.get("meta", {}))
    return HeraldedState(np.array(doc["weights"], dtype=float), doc.get("herald_probability"), meta)


def write_json(doc: dict, path) -> None:
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
