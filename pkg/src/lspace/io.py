"""Readers for datasets, injected costs and distributions, plus report serialization."""
from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

from .domain import DomainError, FiniteDomain, JointDistribution, Sample
from .lattice import LatticeError, Partition


class InputError(ValueError):
    """Malformed input file; the message carries row/column diagnostics."""


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise InputError(f"not a rational: {text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(repr(text))
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational: {text!r}") from None


def read_dataset(path) -> tuple[FiniteDomain, Sample]:
    """CSV with header ``f1..fd,label`` and 0/1 cells; the domain is the set of distinct feature rows."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8 text") from None
    if not rows:
        raise InputError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[-1] != "label":
        raise InputError(f"{path}: header must be f1..fd,label (got {','.join(header)!r})")
    expected = [f"f{j}" for j in range(1, len(header))]
    if header[:-1] != expected:
        raise InputError(f"{path}: feature columns must be named {','.join(expected)}")
    width = len(header)
    feats, labels = [], []
    for r, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise InputError(f"{path}: row {r} has {len(row)} cells, expected {width}")
        vals = []
        for c, cell in enumerate(row, start=1):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise InputError(f"{path}: row {r}, column {c} ({header[c - 1]}): expected 0 or 1, got {cell!r}")
            vals.append(int(cell))
        feats.append(tuple(vals[:-1]))
        labels.append(vals[-1])
    if not feats:
        raise InputError(f"{path}: no observations")
    domain = FiniteDomain.from_feature_rows(feats)
    index = {row: i for i, row in enumerate(domain.features)}
    return domain, Sample(domain, tuple(index[f] for f in feats), tuple(labels))


def write_dataset(path, sample: Sample):
    """Inverse of :func:`read_dataset` for domains with feature vectors."""
    d = sample.domain.dimension
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{j}" for j in range(1, d + 1)] + ["label"])
        for i, y in zip(sample.points, sample.labels):
            w.writerow(list(sample.domain.features[i]) + [y])


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _point_key(tok: str):
    return (0, int(tok), tok) if tok.lstrip("-").isdigit() else (1, 0, tok)


def _domain_from_tokens(tokens) -> FiniteDomain:
    ordered = sorted(set(tokens), key=_point_key)
    if all(_point_key(t)[0] == 0 for t in ordered):
        return FiniteDomain(tuple(int(t) for t in ordered))
    return FiniteDomain(tuple(ordered))


def read_costs(path) -> tuple[FiniteDomain, dict]:
    """``{"1,2|3|4": "0.05" or "1/20"}``; every key must partition the same point set."""
    raw = _load_json(path)
    if not isinstance(raw, dict) or not raw:
        raise InputError(f"{path}: expected a nonempty object of node -> cost")
    point_sets = {}
    for key in raw:
        toks = [t.strip() for blk in str(key).split("|") for t in blk.split(",")]
        if any(not t for t in toks) or len(set(toks)) != len(toks):
            raise InputError(f"{path}: malformed node encoding {key!r}")
        point_sets[key] = frozenset(toks)
    universe = next(iter(point_sets.values()))
    for key, pts in point_sets.items():
        if pts != universe:
            raise InputError(f"{path}: node {key!r} does not cover the same points as the others")
    domain = _domain_from_tokens(universe)
    costs = {}
    for key, val in raw.items():
        try:
            node = Partition.parse(domain, key)
        except LatticeError as exc:
            raise InputError(f"{path}: {exc}") from None
        if node in costs:
            raise InputError(f"{path}: node {key!r} listed twice")
        try:
            costs[node] = parse_rational(val)
        except InputError as exc:
            raise InputError(f"{path}: node {key!r}: {exc}") from None
    return domain, costs


def read_distribution(path) -> JointDistribution:
    """``{"points": [...], "prob": {"point,label": "p/q"}}``; missing entries are 0."""
    raw = _load_json(path)
    if not isinstance(raw, dict) or "points" not in raw or "prob" not in raw:
        raise InputError(f"{path}: expected keys 'points' and 'prob'")
    pts = raw["points"]
    if not isinstance(pts, list) or not pts:
        raise InputError(f"{path}: 'points' must be a nonempty list")
    try:
        domain = FiniteDomain(tuple(pts))
    except (DomainError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    names = {str(p): p for p in domain.points}
    if len(names) != len(domain):
        raise InputError(f"{path}: point names collide once written as text")
    table = {}
    if not isinstance(raw["prob"], dict):
        raise InputError(f"{path}: 'prob' must be an object")
    for key, val in raw["prob"].items():
        point, sep, label = str(key).rpartition(",")
        if not sep or point.strip() not in names or label.strip() not in ("0", "1"):
            raise InputError(f"{path}: bad probability key {key!r}, expected 'point,label'")
        table[(names[point.strip()], int(label))] = parse_rational(val)
    try:
        return JointDistribution.from_mapping(domain, table)
    except DomainError as exc:
        raise InputError(f"{path}: {exc}") from None


def rational(x) -> dict | str | None:
    """JSON form of an exact number: ``{"exact": "p/q", "decimal": float}``."""
    if x is None:
        return None
    if isinstance(x, float):
        return {"exact": "inf" if x > 0 else "-inf", "decimal": None}
    x = Fraction(x)
    return {"exact": f"{x.numerator}/{x.denominator}", "decimal": round(float(x), 10)}


def dump_report(report: dict, path=None) -> str:
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
