"""Analysis reports: a plain dict (JSON) and a text rendering of the same data."""

from __future__ import annotations

import json

from .analysis import CONVENTION


def _u_index(name):
    return int(name.rsplit("_", 1)[1])


def _le(le):
    return str(le) if le is not None else None


def build_report(an, stage="all", timings=False, status=None):
    """Collect everything computed on ``an`` into an ordered dict.

    Every value is a string, an int, a bool or a container of those, so the
    JSON dump is a pure function of the analysis.
    """
    model = an.model
    status = status or an.status
    rep = {
        "model": model.name,
        "convention": CONVENTION,
        "stage": stage,
        "status": status,
        "coordinates": list(model.coordinates),
        "parameters": [f"{n} != 0" if n in model.params.nonzero else n
                       for n in model.params.names],
        "hessian_rank": an.hessian_rank,
        "canonical_hamiltonian": str(an.H_C),
    }
    if an.H_T is not None:
        rep["total_hamiltonian"] = str(an.H_T)
    rep["regular"] = an.n_primary == 0 and status != "inconsistent"
    rep["constraints"] = [c.to_json() for c in an.constraints]
    gens = {}
    for c in an.constraints:
        gens.setdefault(c.generation, []).append(str(c.polynomial))
    rep["constraints_by_generation"] = [
        {"generation": g, "constraints": gens[g]} for g in sorted(gens)]
    rep["trace"] = [s.to_json() for s in an.trace]
    rep["determined_multipliers"] = {
        u: str(an.multipliers[u]) for u in sorted(an.multipliers, key=_u_index)}
    counts = {"k": an.k, "primary": an.n_primary}
    if an.first_class is not None:
        counts.update(s=len(an.first_class), r=len(an.second_class), k1=an.k1,
                      rank=an.rank)
        names = [c.label for c in an.constraints]
        rep["first_class"] = [c.to_json(names) for c in an.first_class]
        rep["second_class"] = [c.to_json(names) for c in an.second_class]
    rep["counts"] = counts
    if an.rho is not None:
        first = an.first_class
        rep["rho"] = [{"psi": first[mu].label, "column": first[nu].label, "value": _le(v)}
                      for (mu, nu), v in sorted(an.rho.items())]
    if an.algebra is not None:
        first = an.first_class
        rep["varrho"] = [{"a": first[a].label, "b": first[b].label, "c": first[c].label,
                          "value": _le(v)}
                         for (a, b, c), v in sorted(an.algebra.items())]
    gen = an.generator
    if gen is not None:
        rep["generator"] = {
            "G": str(gen),
            "solved": {k: str(v) for k, v in sorted(gen.solved.items(), key=lambda kv: _u_index(kv[0]))},
            "free": list(gen.free),
            "eps2": list(gen.eps2),
            "conserved": gen.conserved,
        }
    cert = an.certificate
    rep["genericity_assumptions"] = cert.to_json() if cert is not None else []
    rep["warnings"] = list(an.warnings)
    if timings:
        rep["timings"] = {k: f"{v:.3f}s" for k, v in an.timings.items()}
    return rep


def to_json(rep):
    return json.dumps(rep, indent=2, ensure_ascii=False) + "\n"


def to_text(rep):
    out = []
    w = out.append
    w(f"model: {rep['model']}")
    w(f"convention: {rep['convention']}")
    if rep["parameters"]:
        w(f"parameters: {', '.join(rep['parameters'])}")
    w(f"status: {rep['status']}")
    w(f"hessian rank: {rep['hessian_rank']} of {len(rep['coordinates'])}")
    w(f"H_C = {rep['canonical_hamiltonian']}")
    if rep["regular"]:
        w("regular system: no constraints")
    for grp in rep["constraints_by_generation"]:
        w(f"generation {grp['generation']}:")
        for c in rep["constraints"]:
            if c["generation"] == grp["generation"]:
                w(f"  {c['label']} = {c['polynomial']}   [{c['class']}]")
    for s in rep["trace"]:
        adm = ", ".join(s["admitted"]) or "none"
        det = ", ".join(s["determined_multipliers"]) or "none"
        w(f"sweep {s['sweep']}: admitted {adm}; determined {det}")
    for u, v in rep["determined_multipliers"].items():
        w(f"  {u} = {v}")
    c = rep["counts"]
    w("counts: " + ", ".join(f"{k}={v}" for k, v in c.items()))
    for key in ("first_class", "second_class"):
        for comb in rep.get(key, []):
            w(f"  {comb['label']} = {comb['polynomial']}")
    if rep.get("rho"):
        w("rho:")
        for e in rep["rho"]:
            w(f"  rho[{e['psi']}, {e['column']}] = {e['value']}")
    if rep.get("varrho"):
        w("varrho:")
        for e in rep["varrho"]:
            w(f"  varrho[{e['a']}, {e['b']}; {e['c']}] = {e['value']}")
    if "generator" in rep:
        g = rep["generator"]
        w(f"G = {g['G']}")
        for k, v in g["solved"].items():
            w(f"  {k} = {v}")
        if g["free"]:
            w(f"  free: {', '.join(g['free'])}")
        w(f"  conserved: {'yes' if g['conserved'] else 'no'}")
    if rep["genericity_assumptions"]:
        w("assumed nonzero on the constraint set:")
        for e in rep["genericity_assumptions"]:
            w(f"  {e['polynomial']}   ({e['justification']})")
    for msg in rep["warnings"]:
        w(f"warning: {msg}")
    for k, v in rep.get("timings", {}).items():
        w(f"time {k}: {v}")
    return "\n".join(out) + "\n"
