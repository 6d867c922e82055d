"""JSON and CSV schemas for chains, hierarchies, models and configurations.

Exact coordinates are serialized as coefficient pairs [a, b] meaning
a + b*lam (integers where possible, "p/q" strings otherwise), floats with
shortest round-trip formatting, so export followed by import reproduces
exact values and repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import numpy as np

from .energy import BumpSpec, EnergyModel, InteractionPotential, SubstratePotential
from .errors import DomainError
from .quadratic import QuadraticField, QuadraticNumber
from .substitution import QuasicrystalChain, SubstitutionRule, build_chain


def _frac_out(x: Fraction):
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _frac_in(x) -> Fraction:
    if isinstance(x, str):
        num, den = x.split("/")
        return Fraction(int(num), int(den))
    return Fraction(x)


def _exact_out(x: QuadraticNumber):
    return [_frac_out(x.a), _frac_out(x.b)]


def _exact_in(field: QuadraticField, pair) -> QuadraticNumber:
    return field.element(_frac_in(pair[0]), _frac_in(pair[1]))


def field_to_dict(field: QuadraticField) -> dict:
    return {"p": _frac_out(field.p), "q": _frac_out(field.q), "value": field.value}


def field_from_dict(d: dict) -> QuadraticField:
    return QuadraticField(_frac_in(d["p"]), _frac_in(d["q"]))


def rule_to_dict(rule: SubstitutionRule) -> dict:
    return {
        "alphabet": list(rule.alphabet),
        "images": {c: rule.images[c] for c in rule.alphabet},
        "lengths": {c: _exact_out(rule.lengths[c]) for c in rule.alphabet},
        "lengths_float": {c: float(rule.lengths[c]) for c in rule.alphabet},
    }


def rule_from_dict(d: dict, field: QuadraticField) -> SubstitutionRule:
    lengths = {c: _exact_in(field, d["lengths"][c]) for c in d["alphabet"]}
    return SubstitutionRule(
        alphabet=d["alphabet"], images=d["images"], lengths=lengths, field=field
    )


def chain_to_dict(chain: QuasicrystalChain) -> dict:
    return {
        "rule": rule_to_dict(chain.rule),
        "lambda": field_to_dict(chain.rule.field),
        "window": [_frac_out(chain.window[0]), _frac_out(chain.window[1])],
        "atoms": [_exact_out(s) for s in chain.atoms],
        "atoms_float": [float(s) for s in chain.atoms],
        "labels": list(chain.labels),
    }


def chain_from_dict(d: dict) -> QuasicrystalChain:
    field = field_from_dict(d["lambda"])
    rule = rule_from_dict(d["rule"], field)
    window = (_frac_in(d["window"][0]), _frac_in(d["window"][1]))
    chain = build_chain(rule, window)
    expected = [_exact_in(field, pair) for pair in d["atoms"]]
    if len(expected) != len(chain.atoms) or any(
        x != y for x, y in zip(expected, chain.atoms)
    ):
        raise DomainError("serialized atoms disagree with the regenerated chain")
    return chain


def hierarchy_to_dict(hierarchy) -> dict:
    levels = []
    for lvl in hierarchy.levels:
        entry = {
            "heights_float": lvl.heights_float(),
            "measures_float": lvl.measures_float(),
        }
        if hierarchy.exact:
            entry["heights"] = [_exact_out(h) for h in lvl.heights]
            entry["measures"] = [_exact_out(m) for m in lvl.measures]
        levels.append(entry)
    return {
        "loops": list(hierarchy.rule.alphabet),
        "levels": levels,
        "homology": [list(row) for row in hierarchy.homology],
        "k": hierarchy.k,
        "exact": hierarchy.exact,
    }


def substrate_to_dict(substrate: SubstratePotential) -> dict:
    bumps = {}
    for key, bump in substrate.rules.items():
        bumps[",".join(key)] = {"w": bump.half_width, "h": bump.amplitude}
    return {"range": substrate.range, "key_scheme": "neighbor-pair", "bumps": bumps}


def model_to_dict(model: EnergyModel) -> dict:
    inter = model.interaction
    out = {
        "interaction": {"kind": inter.kind, "kappa": inter.kappa, "rest": inter.rest}
    }
    if model.substrate is not None:
        out["substrate"] = substrate_to_dict(model.substrate)
    return out


def model_from_dict(d: dict, chain: QuasicrystalChain | None) -> EnergyModel:
    inter = d["interaction"]
    if inter["kind"] != "quadratic":
        raise DomainError("only quadratic interactions can be loaded from JSON")
    interaction = InteractionPotential.quadratic(inter["kappa"], inter["rest"])
    substrate = None
    if "substrate" in d:
        if chain is None:
            raise DomainError("substrate potential requires a chain")
        rules = {}
        for key, spec in d["substrate"]["bumps"].items():
            rules[tuple(key.split(","))] = BumpSpec(
                half_width=spec["w"], amplitude=spec["h"]
            )
        substrate = SubstratePotential(chain, rules, range_R=d["substrate"].get("range"))
    return EnergyModel(interaction, substrate)


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)
    if path is not None:
        with open(path, "w") as f:
            f.write(text + "\n")
    return text


def write_config_csv(atoms, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "theta"])
    for i, t in enumerate(np.asarray(atoms, dtype=float)):
        writer.writerow([i, repr(float(t))])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as f:
            f.write(text)
    return text


def read_config_csv(path) -> np.ndarray:
    with open(path) as f:
        reader = csv.reader(f)
        header = next(reader)
        if header[:2] != ["index", "theta"]:
            raise DomainError("config CSV must have header index,theta")
        return np.array([float(row[1]) for row in reader])


def write_orbit_csv(rows, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "theta", "p", "loop_level0", "offset"])
    for row in rows:
        writer.writerow(
            [row[0], repr(float(row[1])), repr(float(row[2])), row[3], repr(float(row[4]))]
        )
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as f:
            f.write(text)
    return text
