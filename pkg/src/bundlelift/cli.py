"""Scenario runner: every construction and check in the library exposed as
named, reproducible commands with JSON reports and optional CSV tables.

The report schema is versioned ("schema": "1"). Reports are byte-identical
for equal configurations when ``--no-timestamp`` is passed (it nulls both
the timestamp and the wall-time field). Exit codes: 0 all verdicts pass,
1 at least one verdict failed, 2 configuration or runtime error.
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bundles import (pullback, tangent_sphere, tautological_complex,
                      tautological_real, trivial)
from .config import (DEFAULT_MESH_LEVEL, DEFAULT_SAMPLES, DEFAULT_SEED,
                     DEFAULT_TRANSPORT_STEPS)
from .errors import (BundleLiftError, ConfigInvalid, NonInjective,
                     UnknownScenario)
from .gluing import (LocalLiftDatum, TransitionDatum, cocycle_compat_check,
                     local_data_from_lift)
from .lifts import (ambient_projection_lift, check_lift, compose,
                    complex_linearity_defect, cpn_conjugation_lift,
                    differential_lift, fiberwise_complex_correction,
                    frame_lift_view, FiberFrame, grassmann_orthogonal_lift,
                    invert, Lift, lift_from_homotopy, metrize,
                    s1xs2_generator_lift, torus_line_lift)
from .manifolds import (ComplexProjective, Sphere, cp1_power_map, degree,
                        identity_diffeo, named_diffeo, random_orthogonal,
                        random_point, random_unimodular, rotation_homotopy,
                        sphere_power_map)
from .numkernel import polar_two_metric
from .obstruction import (lattice_chern_number, plaquette_phases,
                          pullback_invariance_report, torus_criterion,
                          w1_profile)

SCHEMA_VERSION = "1"


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    transport_steps: int = DEFAULT_TRANSPORT_STEPS
    mesh_level: int = DEFAULT_MESH_LEVEL
    tol_exact: float = 1e-10
    tol_transport: float = 1e-5
    json_path: str | None = None
    csv_path: str | None = None
    no_timestamp: bool = False

    def validate(self):
        if self.samples < 1:
            raise ConfigInvalid("samples must be >= 1")
        if self.transport_steps < 16:
            raise ConfigInvalid("transport steps must be >= 16")
        if self.mesh_level < 3:
            raise ConfigInvalid("mesh level must be >= 3")
        if not (0 < self.tol_exact <= 1e-2 and 0 < self.tol_transport <= 1e-2):
            raise ConfigInvalid("tolerances must lie in (0, 1e-2]")
        if self.scenario not in SCENARIOS:
            raise UnknownScenario(
                f"unknown scenario {self.scenario!r}; see `bundlelift list`"
            )


def _check(name, residual, tolerance, comparator="le"):
    residual = float(residual)
    tolerance = float(tolerance)
    verdict = residual <= tolerance if comparator == "le" else residual >= tolerance
    return {"name": name, "residual": residual, "tolerance": tolerance,
            "comparator": comparator, "verdict": bool(verdict)}


def _report_checks(prefix, report, tol, checks, isometry=True):
    checks.append(_check(f"{prefix}.base", report.base_residual, tol))
    checks.append(_check(f"{prefix}.linearity", report.linearity_residual, tol))
    checks.append(_check(f"{prefix}.min_singular_value",
                         report.min_singular_value, 1e-8, "ge"))
    if isometry:
        checks.append(_check(f"{prefix}.isometry", report.isometry_residual, tol))


# ---------------------------------------------------------------------------
# Scenarios. Each returns (checks, table-or-None).


def _scenario_homotopy_lift_sphere(cfg):
    """Transport lift of a rotation homotopy endpoint on the sphere tangent
    bundle; residuals shrink with step count."""
    bundle = tangent_sphere(2)
    h = rotation_homotopy(Sphere(2), (0, 1), np.pi / 2)
    lift = lift_from_homotopy(bundle, h, steps=cfg.transport_steps)
    rep = check_lift(lift, samples=cfg.samples, seed=cfg.seed,
                     tolerance=cfg.tol_transport)
    checks = []
    _report_checks("homotopy_lift", rep, cfg.tol_transport, checks)
    endpoint_gap = 0.0
    for i in range(min(cfg.samples, 100)):
        x = random_point(Sphere(2), cfg.seed + 1000 + i)
        endpoint_gap = max(endpoint_gap, float(np.linalg.norm(
            h.family(1.0, x) - h.endpoint.forward(x))))
    checks.append(_check("homotopy.endpoint_agreement", endpoint_gap, 1e-10))
    return checks, None


def _scenario_metrize_random(cfg):
    """Polar metrization of seeded non-isometric vertical automorphisms:
    isometric output, factorization residual, idempotence."""
    model = Sphere(2)
    bundle = trivial(model, 3)
    rng = np.random.default_rng(cfg.seed)
    a = rng.normal(size=(3, 3)) + 2.5 * np.eye(3)
    s = rng.normal(size=(3, 3))

    def field(x):
        return a + 0.2 * float(x[0]) * s

    vert = Lift(bundle, identity_diffeo(model), lambda x, v: field(x) @ v,
                "vertical_random", cfg.tol_exact)
    iso = metrize(vert)
    rep = check_lift(iso, samples=cfg.samples, seed=cfg.seed, tolerance=1e-8)
    checks = []
    _report_checks("metrized", rep, 1e-8, checks)
    iso2 = metrize(iso)
    idem = 0.0
    fact = 0.0
    for i in range(min(cfg.samples, 20)):
        x = random_point(model, cfg.seed + 500 + i)
        m1 = iso.fiber_matrix_in_bases(x)
        m2 = iso2.fiber_matrix_in_bases(x)
        idem = max(idem, float(np.max(np.abs(m1 - m2))))
        f = vert.fiber_matrix_in_bases(x)
        psi, xi = polar_two_metric(f, np.eye(3), np.eye(3))
        fact = max(fact, float(np.max(np.abs(xi @ psi - f))))
    checks.append(_check("metrize.idempotence", idem, 1e-8))
    checks.append(_check("metrize.factorization", fact, 1e-8))
    return checks, None


def _scenario_frame_view(cfg):
    """Induced map on orthonormal frames: orthonormal output and O(r)
    equivariance."""
    lift = grassmann_orthogonal_lift(random_orthogonal(4, cfg.seed), 2)
    bundle = lift.bundle
    g = random_orthogonal(2, cfg.seed + 1)
    gram_defect = 0.0
    equiv = 0.0
    for i in range(min(cfg.samples, 50)):
        x = random_point(bundle.base, cfg.seed + i)
        frame = FiberFrame(x, bundle.fiber_basis(x))
        out = frame_lift_view(lift, frame)
        gram = out.vectors.T @ out.vectors
        gram_defect = max(gram_defect, float(np.max(np.abs(gram - np.eye(2)))))
        rotated = FiberFrame(x, frame.vectors @ g)
        out_rot = frame_lift_view(lift, rotated)
        equiv = max(equiv, float(np.max(np.abs(out_rot.vectors - out.vectors @ g))))
    checks = [
        _check("frame.output_gram", gram_defect, cfg.tol_exact),
        _check("frame.equivariance", equiv, 1e-8),
    ]
    return checks, None


def _scenario_tangent_isometry(cfg):
    """Differential lift of sphere diffeomorphisms followed by metrization:
    every diffeomorphism yields an isometry of the round tangent bundle."""
    sigma = named_diffeo(Sphere(2), "sphere_reflection")
    dl = differential_lift(sigma)
    rep = check_lift(dl, samples=cfg.samples, seed=cfg.seed,
                     tolerance=cfg.tol_transport)
    checks = []
    _report_checks("differential_sigma", rep, cfg.tol_transport, checks,
                   isometry=False)
    iso = metrize(dl)
    rep_iso = check_lift(iso, samples=min(cfg.samples, 50), seed=cfg.seed,
                         tolerance=1e-8)
    checks.append(_check("metrized_sigma.isometry", rep_iso.isometry_residual, 1e-8))
    rot = named_diffeo(Sphere(2), "sphere_rotation",
                       matrix=random_orthogonal(3, cfg.seed))
    rep_rot = check_lift(differential_lift(rot), samples=min(cfg.samples, 50),
                         seed=cfg.seed, tolerance=cfg.tol_transport)
    checks.append(_check("differential_rotation.isometry",
                         rep_rot.isometry_residual, 1e-8))
    return checks, None


def _scenario_ambient_projection(cfg):
    """Projection lifts inside the ambient trivial bundle: a small rotation
    projects injectively, the orthocomplement involution does not, and the
    literal complement variant leaves the fibers."""
    bundle = tautological_real(1, 2)
    theta = 0.1
    rot = np.array([[np.cos(theta), -np.sin(theta)],
                    [np.sin(theta), np.cos(theta)]])
    phi = named_diffeo(bundle.base, "grassmann_action", matrix=rot)
    lift = ambient_projection_lift(bundle, phi, seed=cfg.seed)
    rep = check_lift(lift, samples=cfg.samples, seed=cfg.seed,
                     tolerance=cfg.tol_exact)
    checks = []
    _report_checks("small_rotation", rep, cfg.tol_exact, checks, isometry=False)

    involution = named_diffeo(bundle.base, "grassmann_involution")
    try:
        ambient_projection_lift(bundle, involution, seed=cfg.seed)
        refused = 1.0
    except NonInjective:
        refused = 0.0
    checks.append(_check("involution.non_injective_refused", refused, 0.5))

    # the complement-projection variant is injective for the involution but
    # its image is orthogonal to the target fiber
    literal = ambient_projection_lift(bundle, involution,
                                      variant="orthocomplement", seed=cfg.seed)
    rep_lit = check_lift(literal, samples=min(cfg.samples, 50), seed=cfg.seed,
                         tolerance=cfg.tol_exact)
    checks.append(_check("orthocomplement_variant.leaves_fibers",
                         rep_lit.base_residual, 0.5, "ge"))
    return checks, None


def _scenario_grassmann_action(cfg):
    """The natural orthogonal-group lift on the tautological bundle over a
    Grassmannian: exact isometry, group homomorphism on base maps."""
    a1 = random_orthogonal(4, cfg.seed)
    a2 = random_orthogonal(4, cfg.seed + 1)
    l1 = grassmann_orthogonal_lift(a1, 2)
    l2 = grassmann_orthogonal_lift(a2, 2)
    rep = check_lift(l1, samples=cfg.samples, seed=cfg.seed,
                     tolerance=cfg.tol_exact)
    checks = []
    _report_checks("orthogonal_lift", rep, cfg.tol_exact, checks)
    comp = compose(l1, l2)
    hom = 0.0
    for i in range(min(cfg.samples, 100)):
        x = random_point(l1.bundle.base, cfg.seed + i)
        hom = max(hom, l1.bundle.base.distance(
            comp.base_map.forward(x), l1.base_map.forward(l2.base_map.forward(x))))
    checks.append(_check("compose.base_homomorphism", hom, 1e-10))
    inv_rep = check_lift(compose(l1, invert(l1)),
                         samples=min(cfg.samples, 50), seed=cfg.seed,
                         tolerance=1e-8)
    checks.append(_check("compose_invert.base", inv_rep.base_residual, 1e-8))
    return checks, None


def _scenario_cpn_conjugation(cfg):
    """Conjugation lift on the tautological line bundle over CP^n:
    anti-linear, obstructed as a C-linear lift, fiberwise correctable."""
    lift = cpn_conjugation_lift(1)
    rep = check_lift(lift, samples=cfg.samples, seed=cfg.seed,
                     tolerance=cfg.tol_exact)
    checks = []
    _report_checks("conjugation", rep, cfg.tol_exact, checks)
    c_res, a_res = complex_linearity_defect(lift, samples=min(cfg.samples, 50),
                                            seed=cfg.seed)
    checks.append(_check("conjugation.anti_linearity", a_res, cfg.tol_exact))
    checks.append(_check("conjugation.c_linearity_defect", c_res, 1.0, "ge"))

    corr = 0.0
    for i in range(20):
        x = random_point(ComplexProjective(1), cfg.seed + 300 + i)
        y = lift.base_map.inverse(x)
        psi = fiberwise_complex_correction(lift, x)
        j_x = lift.bundle.complex_structure(x)
        j_y = lift.bundle.complex_structure(y)
        corrected = psi @ lift.fiber_matrix(y)
        corr = max(corr, float(np.max(np.abs(
            (corrected @ j_y - j_x @ corrected) @ lift.bundle.fiber_projector(y)))))
    checks.append(_check("fiberwise_correction.commutation", corr, 1e-8))

    report = pullback_invariance_report(lift.base_map, lift.bundle,
                                        mesh_level=cfg.mesh_level)
    checks.append(_check("obstruction.c1", abs(report["c1"] - (-1)), 0.5))
    checks.append(_check("obstruction.c1_pullback",
                         abs(report["c1_pullback"] - 1), 0.5))
    checks.append(_check("obstruction.flagged",
                         0.0 if report["lift_obstructed"] else 1.0, 0.5))

    rep2 = check_lift(cpn_conjugation_lift(2), samples=min(cfg.samples, 50),
                      seed=cfg.seed, tolerance=cfg.tol_exact)
    checks.append(_check("conjugation_n2.base", rep2.base_residual, cfg.tol_exact))

    phases = plaquette_phases(tautological_complex(1), cfg.mesh_level)
    table = {
        "name": "plaquette_phases",
        "header": ["triangle_index", "phase"],
        "rows": [[i, repr(float(p))] for i, p in enumerate(phases)],
    }
    return checks, table


def _scenario_sphere_pullbacks(cfg):
    """Degrees of the power maps on the sphere and Chern numbers of their
    pullback bundles; naturality ties the two integer invariants together."""
    checks = []
    ident = identity_diffeo(Sphere(2))
    sigma = named_diffeo(Sphere(2), "sphere_reflection")
    degree_cases = [("id", ident, 1), ("sigma", sigma, -1),
                    ("f2", sphere_power_map(2), 2), ("f3", sphere_power_map(3), 3)]
    degs = {}
    for name, f, expected in degree_cases:
        d = degree(f, cfg.mesh_level)
        degs[name] = d
        checks.append(_check(f"degree.{name}", abs(d - expected), 0.5))

    f2 = sphere_power_map(2)
    comp = lambda x: f2.forward(f2.forward(x))
    checks.append(_check("degree.f2of2_multiplicative",
                         abs(degree(comp, cfg.mesh_level) - 4), 0.5))

    gamma = tautological_complex(1)
    cherns = {"trivial": lattice_chern_number(
        trivial(ComplexProjective(1), 1, complex_fibers=True), cfg.mesh_level)}
    cherns["gamma1"] = lattice_chern_number(gamma, cfg.mesh_level)
    for n in (2, 3):
        cherns[f"f{n}_pullback"] = lattice_chern_number(
            pullback(cp1_power_map(n), gamma), cfg.mesh_level)
    expected_c1 = {"trivial": 0, "gamma1": -1, "f2_pullback": -2, "f3_pullback": -3}
    for name, res in cherns.items():
        checks.append(_check(f"chern.{name}", abs(res.value - expected_c1[name]), 0.5))
        checks.append(_check(f"chern.{name}.stable", 0.0 if res.stable else 1.0, 0.5))
    for n in (2, 3):
        checks.append(_check(
            f"naturality.f{n}",
            abs(cherns[f"f{n}_pullback"].value - degs[f"f{n}"] * cherns["gamma1"].value),
            0.5))
    return checks, None


def _scenario_torus_sweep(cfg):
    """Exhaustive torus line-bundle criterion sweep: the fast mod-2 verdict
    against the subgroup oracle, lift construction agreement, and holonomy
    sign profiles."""
    checks = []
    rows = []
    mismatches = 0
    lift_disagreements = 0
    total = 0
    for n in (1, 2, 3):
        bits = [tuple(int(x) for x in np.binary_repr(m, width=n))
                for m in range(1, 2 ** n)]
        for b in bits:
            for i in range(20):
                a = random_unimodular(n, cfg.seed + 101 * i + 7 * total)
                res = torus_criterion(a, b)
                total += 1
                if res.fast_verdict != res.oracle_verdict:
                    mismatches += 1
                try:
                    torus_line_lift(a, b)
                    built = True
                except BundleLiftError:
                    built = False
                if built != res.fast_verdict:
                    lift_disagreements += 1
                rows.append([n, "".join(map(str, b)), i,
                             int(res.fast_verdict), int(res.oracle_verdict)])
    checks.append(_check("criterion.fast_vs_oracle_mismatches", mismatches, 0.5))
    checks.append(_check("criterion.lift_construction_agreement",
                         lift_disagreements, 0.5))
    # (2^1 - 1) + (2^2 - 1) + (2^3 - 1) = 11 bit vectors, 20 matrices each
    checks.append(_check("criterion.cases_swept", total, 220, "ge"))

    w1_bad = 0
    for n in (1, 2, 3):
        for m in range(1, 2 ** n):
            b = tuple(int(x) for x in np.binary_repr(m, width=n))
            profile = w1_profile(b, steps=cfg.transport_steps)
            expected = np.array([(-1) ** bi for bi in b])
            w1_bad += int(np.any(profile != expected))
    checks.append(_check("w1.profile_mismatches", w1_bad, 0.5))
    table = {
        "name": "torus_sweep",
        "header": ["n", "b", "case", "fast_verdict", "oracle_verdict"],
        "rows": rows,
    }
    return checks, table


def _scenario_s1xs2_generators(cfg):
    """Lifts of the three diffeotopy generators of S^1 x S^2 on the product
    bundle; the twisted rotation restricts to the identity on the theta=0
    slice."""
    checks = []
    for n in (1, 2):
        for name in ("s", "r", "a"):
            lift = s1xs2_generator_lift(name, n, steps=cfg.transport_steps)
            samples = cfg.samples if name != "a" else min(cfg.samples, 50)
            tol = cfg.tol_exact if name != "a" else cfg.tol_transport
            rep = check_lift(lift, samples=samples, seed=cfg.seed, tolerance=tol)
            _report_checks(f"{name}_lift.n{n}", rep, tol, checks,
                           isometry=(name != "a"))
        # theta = 0 slice of r: fiber action is the identity
        r_lift = s1xs2_generator_lift("r", n, steps=cfg.transport_steps)
        slice_res = 0.0
        p1 = np.array([[1.0, 0.0], [0.0, 0.0]])  # line at angle 0
        for i in range(min(cfg.samples, 20)):
            rng = np.random.default_rng([cfg.seed, 77, i])
            x2 = ComplexProjective(1).random_point(rng)
            x = (p1, x2)
            v = r_lift.bundle.random_fiber_vector(x, rng)
            slice_res = max(slice_res, float(np.linalg.norm(
                r_lift.action(x, v) - v)))
        checks.append(_check(f"r_lift.n{n}.theta0_identity", slice_res, 1e-12))
        s_lift = s1xs2_generator_lift("s", n, steps=cfg.transport_steps)
        roundtrip = 0.0
        for i in range(min(cfg.samples, 20)):
            x = random_point(s_lift.bundle.base, cfg.seed + 900 + i)
            y = s_lift.base_map.forward(s_lift.base_map.forward(x))
            roundtrip = max(roundtrip, s_lift.bundle.base.distance(x, y))
        checks.append(_check(f"s_lift.n{n}.involution", roundtrip, 1e-10))
    return checks, None


def _scenario_gluing_demo(cfg):
    """Cocycle compatibility on a patch overlap: a constructed-compatible
    datum, its rotation-perturbed variant, and the adapter that extracts
    local data from a lift."""
    rng = np.random.default_rng(cfg.seed)
    points = [rng.uniform(-1.0, 1.0, size=2) for _ in range(12)]
    shift = rng.uniform(0.05, 0.3, size=2)

    def rot3(angle, axes=(0, 1)):
        m = np.eye(3)
        i, j = axes
        c, s = np.cos(angle), np.sin(angle)
        m[i, i] = c
        m[j, j] = c
        m[i, j] = -s
        m[j, i] = s
        return m

    from .manifolds import Diffeo as _Diffeo
    phi = _Diffeo("patch_shift", lambda x: np.asarray(x) * np.array([1.0, -1.0]),
                  lambda x: np.asarray(x) * np.array([1.0, -1.0]), None)

    def alpha1(x):
        return rot3(0.4 * float(x[0]), (0, 1)) @ rot3(0.2 * float(x[0] * x[0]), (1, 2))

    def alpha_t(x):
        return rot3(0.3 * float(x[0]) + 0.1, (0, 2))

    def alpha2(x):
        return np.linalg.inv(alpha_t(phi.forward(x))) @ alpha1(x) @ alpha_t(x)

    d1 = LocalLiftDatum("U1", points, alpha1)
    d2 = LocalLiftDatum("U2", points, alpha2)
    t = TransitionDatum(points, alpha_t)
    good = cocycle_compat_check(d1, d2, t, phi)
    checks = [_check("cocycle.constructed_residual", good["max_residual"], 1e-12)]

    bump = rot3(0.1, (0, 1))
    d2_bad = LocalLiftDatum("U2", points, lambda x: alpha2(x) @ bump)
    bad = cocycle_compat_check(d1, d2_bad, t, phi)
    checks.append(_check("cocycle.perturbed_incompatible",
                         0.0 if not bad["compatible"] else 1.0, 0.5))
    checks.append(_check("cocycle.perturbed_residual_near_0.1",
                         abs(bad["max_residual"] - 0.1), 0.01))

    # adapter round trip on the tautological line over RP^1
    refl = np.diag([1.0, -1.0])
    lift = grassmann_orthogonal_lift(refl, 1)
    bundle = lift.bundle

    def in_u1(p):
        return p[0, 0] > 0.1

    def in_u2(p):
        return p[1, 1] > 0.1

    def frame_u1(p):
        col = np.asarray(p)[:, 0]
        return (col / np.linalg.norm(col)).reshape(2, 1)

    def frame_u2(p):
        col = np.asarray(p)[:, 1]
        return (col / np.linalg.norm(col)).reshape(2, 1)

    pts1, pts2, overlap = [], [], []
    i = 0
    while len(overlap) < 8 and i < 200:
        p = random_point(bundle.base, cfg.seed + i)
        i += 1
        if in_u1(p):
            pts1.append(p)
        if in_u2(p):
            pts2.append(p)
        if in_u1(p) and in_u2(p):
            overlap.append(p)
    da, db, dt = local_data_from_lift(lift, ("U1", pts1, in_u1),
                                      ("U2", pts2, in_u2),
                                      frame_u1, frame_u2, overlap)
    adapted = cocycle_compat_check(da, db, dt, lift.base_map)
    checks.append(_check("cocycle.adapter_from_lift",
                         adapted["max_residual"], 1e-10))
    return checks, None


SCENARIOS = {
    "homotopy_lift_sphere": _scenario_homotopy_lift_sphere,
    "metrize_random": _scenario_metrize_random,
    "frame_view": _scenario_frame_view,
    "tangent_isometry": _scenario_tangent_isometry,
    "ambient_projection": _scenario_ambient_projection,
    "grassmann_action": _scenario_grassmann_action,
    "cpn_conjugation": _scenario_cpn_conjugation,
    "sphere_pullbacks": _scenario_sphere_pullbacks,
    "torus_sweep": _scenario_torus_sweep,
    "s1xs2_generators": _scenario_s1xs2_generators,
    "gluing_demo": _scenario_gluing_demo,
}


REPORT_SCHEMA = {
    "schema": SCHEMA_VERSION,
    "fields": {
        "schema": "report schema version (string)",
        "scenario": "scenario name",
        "version": "package version",
        "config": "echo of the scenario configuration",
        "checks": "list of {name, residual, tolerance, comparator, verdict}",
        "overall": "conjunction of all verdicts",
        "wall_time": "seconds, null when --no-timestamp is used",
        "timestamp": "UTC ISO-8601, null when --no-timestamp is used",
    },
    "comparators": {"le": "pass iff residual <= tolerance",
                    "ge": "pass iff residual >= tolerance"},
}


def run_scenario(cfg):
    """Execute a scenario and assemble its report dictionary."""
    cfg.validate()
    start = time.perf_counter()
    checks, table = SCENARIOS[cfg.scenario](cfg)
    wall = time.perf_counter() - start
    report = {
        "schema": SCHEMA_VERSION,
        "scenario": cfg.scenario,
        "version": __version__,
        "config": {
            "seed": cfg.seed,
            "samples": cfg.samples,
            "transport_steps": cfg.transport_steps,
            "mesh_level": cfg.mesh_level,
            "tol_exact": cfg.tol_exact,
            "tol_transport": cfg.tol_transport,
        },
        "checks": checks,
        "overall": all(c["verdict"] for c in checks),
        "wall_time": None if cfg.no_timestamp else round(wall, 6),
        "timestamp": None if cfg.no_timestamp else
        datetime.now(timezone.utc).isoformat(),
    }
    return report, table


def emit_plot_data(table, path):
    """Write a scenario table (or a checks table) as deterministic CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table["header"])
    for row in table["rows"]:
        writer.writerow(row)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _checks_table(report):
    return {
        "name": "checks",
        "header": ["name", "residual", "tolerance", "comparator", "verdict"],
        "rows": [[c["name"], repr(c["residual"]), repr(c["tolerance"]),
                  c["comparator"], int(c["verdict"])] for c in report["checks"]],
    }


def _render_report(report):
    return json.dumps(report, indent=2) + "\n"


def _apply_thread_cap():
    cap = os.environ.get("BUNDLELIFT_THREADS")
    if not cap:
        return
    try:
        import numba

        numba.set_num_threads(max(1, int(cap)))
    except (ImportError, ValueError):
        pass


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bundlelift",
        description="Diffeomorphism-lifting constructions and checks on "
                    "concrete vector bundles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("scenario", help="run a named scenario")
    run.add_argument("name", help="scenario name (see `bundlelift list`)")
    run.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    run.add_argument("--steps", type=int, default=DEFAULT_TRANSPORT_STEPS,
                     help="transport integration steps")
    run.add_argument("--mesh", type=int, default=DEFAULT_MESH_LEVEL,
                     help="icosphere subdivision level")
    run.add_argument("--tol-exact", type=float, default=1e-10)
    run.add_argument("--tol-transport", type=float, default=1e-5)
    run.add_argument("--json", dest="json_path", default=None,
                     help="write the JSON report to this path")
    run.add_argument("--csv", dest="csv_path", default=None,
                     help="write the scenario's CSV table to this path")
    run.add_argument("--no-timestamp", action="store_true",
                     help="null the timestamp and wall-time fields "
                          "(byte-identical reports)")
    sub.add_parser("list", help="list scenario names")
    sub.add_parser("report-schema", help="print the JSON report schema")
    return parser


def main(argv=None):
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list":
        for name in sorted(SCENARIOS):
            print(name)
        return 0
    if args.command == "report-schema":
        print(json.dumps(REPORT_SCHEMA, indent=2))
        return 0
    cfg = ScenarioConfig(
        scenario=args.name,
        seed=args.seed,
        samples=args.samples,
        transport_steps=args.steps,
        mesh_level=args.mesh,
        tol_exact=args.tol_exact,
        tol_transport=args.tol_transport,
        json_path=args.json_path,
        csv_path=args.csv_path,
        no_timestamp=args.no_timestamp,
    )
    try:
        report, table = run_scenario(cfg)
        rendered = _render_report(report)
        if cfg.json_path:
            with open(cfg.json_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(rendered)
            n_pass = sum(c["verdict"] for c in report["checks"])
            print(f"{cfg.scenario}: {'PASS' if report['overall'] else 'FAIL'} "
                  f"({n_pass}/{len(report['checks'])} checks) -> {cfg.json_path}")
        else:
            sys.stdout.write(rendered)
        if cfg.csv_path:
            emit_plot_data(table if table is not None else _checks_table(report),
                           cfg.csv_path)
    except BundleLiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    return 0 if report["overall"] else 1


if __name__ == "__main__":
    sys.exit(main())
