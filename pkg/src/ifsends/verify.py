"""Fixture verification: expected outcomes plus the cross-fixture claims.

Every check is deterministic (fixed parameters and seeds, no timings), so the
JSON summary is byte-identical across runs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .affine import IfsSystem
from .attractor import (
    WalkSpec,
    component_of,
    count_components,
    encode_walk,
    hausdorff_upper,
    product_contraction,
    sample_cloud,
    walk_is_ray,
)
from .ends import end_components, walk_end
from .fixtures import FIXTURE_SOURCES, fixture, fixtures
from .report import analyze, default_epsilon
from .semigroup import balls_isomorphic, build_ball, constancy_exceptions

__all__ = ["Check", "run_verify", "augmentation_length", "random_ray_pairs", "verify_json"]

AUGMENT_TOLERANCE = 1 / 256


@dataclass
class Check:
    name: str
    passed: bool
    summary: str
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.summary}"

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "summary": self.summary,
                "detail": self.detail}


def _fixture_check(name: str) -> Check:
    fx = fixture(name)
    rep = analyze(fx.document, fx.params)
    j = rep.to_json()
    exp = fx.expected
    got = {
        "relations": all(r["holds"] for r in j["system"]["relations"]),
        "idempotents": j["idempotents"]["status"],
        "ends": None if rep.ends is None else rep.ends.classification,
        "certificate": rep.certificate is not None,
        "link_edges": len(rep.link_graph.edges),
        "link_connected": j["link_graph"]["connected"],
        "components": rep.components.component_count,
        "nondegenerate": rep.components.nondegenerate_count,
        "C_empty": not rep.C.values,
        "C_contains": [v for v in exp.get("C_contains", []) if v in j["C"]["values"]],
    }
    wrong = [k for k, v in exp.items() if got[k] != v]
    if not got["relations"]:
        wrong.append("relations")
    wrong += [f"verdict {a['verdict']}" for a in j["anomalies"] if a["kind"] == "verdict"]
    parts = [f"{len(j['system']['relations'])} relations exact" if got["relations"]
             else "relation anomaly"]
    parts.append(f"idempotents {got['idempotents']}")
    if got["ends"]:
        parts.append(f"ends {got['ends']}")
    parts.append("certificate issued" if got["certificate"] else "no certificate")
    parts.append(f"{got['components']} component(s), {got['nondegenerate']} nondegenerate")
    summary = ", ".join(parts)
    if wrong:
        summary += "; mismatched: " + ", ".join(wrong)
    detail = {"expected": exp, "observed": {k: got[k] for k in exp}, "anomalies": j["anomalies"],
              "verdicts": j["verdicts"]}
    return Check(name, not wrong, summary, detail)


def augmentation_length(system: IfsSystem, tol: float = AUGMENT_TOLERANCE) -> int:
    """Smallest L whose certified cloud error is below ``tol``."""
    L = 1
    while system.diameter_bound * product_contraction(system, L) >= tol:
        L += 1
    return L


def _augmentation_check(small: str, big: str) -> Check:
    F = fixtures()
    s_sys, b_sys = F[small].system, F[big].system
    L = max(augmentation_length(s_sys), augmentation_length(b_sys))
    a, b = sample_cloud(s_sys, L), sample_cloud(b_sys, L)
    h = hausdorff_upper(a, b)
    limit = 2 * max(a.error_radius, b.error_radius)
    ok = h <= limit
    return Check(f"{small}~{big}", ok,
                 f"same attractor at L={L}: Hausdorff bound {h:.6g} <= {limit:.6g}" if ok
                 else f"Hausdorff bound {h:.6g} exceeds {limit:.6g} at L={L}",
                 {"L": L, "hausdorff_upper": h, "limit": limit})


def _ex19_checks() -> Iterator[Check]:
    F = fixtures()
    s1, s2 = F["ex19_abc"].system, F["ex19_abd"].system
    iso = balls_isomorphic(build_ball(s1, 9), build_ball(s2, 9), 8)
    yield Check("ex19 Cayley balls isomorphic", iso,
                "depth-8 balls isomorphic" if iso else
                "depth-8 balls are not isomorphic (b c = c in {a,b,c}, no such collapse in {a,b,d})",
                {"depth": 8, "isomorphic": iso})
    h = hausdorff_upper(sample_cloud(s1, 12), sample_cloud(s2, 12))
    yield Check("ex19 attractors differ", h > 0.15,
                f"Hausdorff bound {h:.6g} at L=12", {"L": 12, "hausdorff_upper": h})


def _constancy_check(depth: int) -> Check:
    checked = {}
    bad = {}
    for name, doc in fixtures().items():
        n, exc = constancy_exceptions(doc.system, depth)
        checked[name] = n
        if exc:
            bad[name] = len(exc)
    total = sum(checked.values())
    return Check("constant/idempotent/dead-end", not bad,
                 f"{total} non-frontier elements at depth {depth}, {sum(bad.values())} exceptions",
                 {"depth": depth, "checked": checked, "exceptions": bad})


def random_ray_pairs(system: IfsSystem, n: int, seed: int,
                     max_pre: int = 4, max_period: int = 3) -> list[tuple[WalkSpec, WalkSpec]]:
    """``n`` pairs of eventually periodic rays drawn from a seeded generator."""
    rng = random.Random(seed)
    g = len(system)

    def draw() -> WalkSpec:
        while True:
            w = WalkSpec(tuple(rng.randrange(g) for _ in range(rng.randint(0, max_pre))),
                         tuple(rng.randrange(g) for _ in range(rng.randint(1, max_period))))
            if walk_is_ray(system, w):
                return w

    return [(draw(), draw()) for _ in range(n)]


def _ray_check(name: str = "koch3", pairs: int = 20, seed: int = 25) -> Check:
    fx = fixture(name)
    system = fx.document.system
    p = fx.params
    cloud = sample_cloud(system, p["L"])
    rep = count_components(cloud, default_epsilon(cloud))
    ball = build_ball(system, p["k_max"] + p["margin"])
    k = p["k_max"]
    n_ends = len(end_components(ball, k))
    failures = []
    undetermined = []
    for i, (u, v) in enumerate(random_ray_pairs(system, pairs, seed)):
        eu = walk_end(ball, k, u.prefix(ball.radius))
        ev = walk_end(ball, k, v.prefix(ball.radius))
        if eu is None or ev is None:
            undetermined.append(i)
            continue
        cu = component_of(cloud, rep, encode_walk(system, u))
        cv = component_of(cloud, rep, encode_walk(system, v))
        if eu == ev and cu != cv:
            failures.append(i)
    failures += undetermined
    return Check(f"{name} ray pairs", not failures,
                 f"{pairs} seeded ray pairs in one end encode points of one component"
                 if not failures else f"pairs {failures} split across components",
                 {"pairs": pairs, "seed": seed, "ends_at_k": n_ends, "failures": failures,
                  "undetermined": undetermined})


def run_verify(constancy_depth: int = 8,
               progress: Callable[[Check], None] | None = None) -> list[Check]:
    checks: list[Check] = []

    def add(c: Check) -> None:
        checks.append(c)
        if progress is not None:
            progress(c)

    for name in FIXTURE_SOURCES:
        add(_fixture_check(name))
    add(_augmentation_check("koch2", "koch3"))
    add(_augmentation_check("sierpinski3", "sierpinski5"))
    for c in _ex19_checks():
        add(c)
    add(_ray_check())
    add(_constancy_check(constancy_depth))
    return checks


def verify_json(checks: list[Check]) -> str:
    doc = {"passed": all(c.passed for c in checks), "checks": [c.to_json() for c in checks]}
    return json.dumps(doc, indent=2) + "\n"
