"""Text and structured (JSON) rendering of analysis results.

Both formats are deterministic: identical inputs give identical bytes.
Rationals are written as ``p/q`` strings so nothing is lost to floats.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .equilibrium import ConversionResult, EquilibriumReport, Witness
from .scenarios import ScenarioResult


def _q(x) -> str:
    return str(Fraction(x))


def _value(x):
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return _q(x)
    if isinstance(x, (list, tuple)):
        return [_value(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _value(v) for k, v in x.items()}
    return str(x)


def _witness_doc(w: Witness) -> dict:
    return {"player": w.player + 1, "state": w.state, "machine": w.machine,
            "before": _q(w.before), "after": _q(w.after)}


def equilibrium_document(r: EquilibriumReport) -> dict:
    return {"kind": r.kind, "verdict": r.verdict, "candidates": r.candidates,
            "witnesses": [_witness_doc(w) for w in r.witnesses], "notes": list(r.notes)}


def document(result) -> dict:
    """Plain dict view of any result object the CLI produces."""
    if isinstance(result, EquilibriumReport):
        return equilibrium_document(result)
    if isinstance(result, ScenarioResult):
        return {"scenario": result.name, "passed": result.passed,
                "assertions": [{"name": a.name, "expected": _value(a.expected),
                                "actual": _value(a.actual), "passed": a.passed}
                               for a in result.assertions]}
    if isinstance(result, ConversionResult):
        return {"profile": [m.name for m in result.profile], "iterations": result.iterations,
                "log": [{"iteration": it, "player": i + 1, "state": q, "machine": name,
                         "before": _q(b), "after": _q(a)}
                        for it, i, q, name, b, a in result.log],
                "beliefs": result.beliefs.dump()}
    if isinstance(result, dict):
        return {str(k): _value(v) for k, v in result.items()}
    raise TypeError(f"cannot render {type(result).__name__}")


def _text_lines(doc: dict, result) -> list:
    if isinstance(result, EquilibriumReport):
        lines = [f"kind={doc['kind']}", f"verdict={'true' if doc['verdict'] else 'false'}",
                 f"candidates={doc['candidates']}"]
        for w in doc["witnesses"]:
            state = "bot" if w["state"] is None else w["state"]
            lines.append(f"witness={w['player']}:{state}:{w['machine']}:{w['before']}:"
                         f"{w['after']}")
        lines += [f"note={n}" for n in doc["notes"]]
        return lines
    if isinstance(result, ScenarioResult):
        lines = [f"scenario={doc['scenario']}", f"passed={'true' if doc['passed'] else 'false'}"]
        for a in doc["assertions"]:
            status = "pass" if a["passed"] else "FAIL"
            lines.append(f"assert={status}:{a['name']}:expected={_flat(a['expected'])}"
                         f":actual={_flat(a['actual'])}")
        return lines
    return [f"{k}={_flat(v)}" for k, v in _pairs(doc)]


def _flat(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, list):
        return "[" + ",".join(_flat(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ",".join(f"{k}:{_flat(x)}" for k, x in v.items()) + "}"
    return str(v)


def _pairs(doc: dict):
    for k, v in doc.items():
        # lists of scalars become repeated keys, one line each
        if isinstance(v, list) and all(not isinstance(x, (list, dict)) for x in v):
            for x in v:
                yield k, x
        else:
            yield k, v


def report(result, fmt: str = "text") -> bytes:
    doc = document(result)
    if fmt == "text":
        return ("\n".join(_text_lines(doc, result)) + "\n").encode()
    if fmt == "structured":
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}")


def parse_structured(data: bytes | str) -> EquilibriumReport:
    doc = json.loads(data)
    witnesses = [Witness(w["player"] - 1, w["state"], w["machine"], Fraction(w["before"]),
                         Fraction(w["after"])) for w in doc["witnesses"]]
    return EquilibriumReport(doc["kind"], doc["verdict"], witnesses, doc["candidates"],
                             list(doc["notes"]))
