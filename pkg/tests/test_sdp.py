"""Solver tests against analytically solvable margin programs."""

import io

import numpy as np
import pytest

from delaymargin.lmi import DelaySystem, HierarchyParams, assemble_stability_lmis
from delaymargin.sdp import (
    FEASIBLE,
    INFEASIBLE,
    ConeProgram,
    SolverOptions,
    decide_feasibility,
    solve,
    to_margin_program,
    verify_certificate,
)


def block(f0, stack):
    return np.asarray(f0, dtype=float), np.asarray(stack, dtype=float)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def oracle_cases():
    """Ten margin programs with closed-form optima.

    Each is small enough to solve by hand: diagonal structure, a single
    coupling, or a box-active optimum.
    """
    cases = []

    # 1. scalar free variable, tight box: t* = B
    cases.append(
        ("scalar-box", ConeProgram([block(np.zeros((1, 1)), np.ones((1, 1, 1)))], 1, 1.0), 1.0)
    )
    # 2. antagonistic pair: only the zero margin is attainable
    st = np.zeros((1, 2, 2))
    st[0] = np.diag([1.0, -1.0])
    cases.append(("antagonistic", ConeProgram([block(np.zeros((2, 2)), st)], 1, 1e4), 0.0))
    # 3. constant block, no variables: margin is the smallest eigenvalue
    c = np.array([[3.5, 1.5], [1.5, 3.5]])  # eigenvalues 2 and 5
    cases.append(("constant-only", ConeProgram([block(c, np.zeros((0, 2, 2)))], 0, 1e4), 2.0))
    # 4. identity direction with box: t* = B
    st = np.zeros((1, 2, 2))
    st[0] = np.eye(2)
    cases.append(("identity-box", ConeProgram([block(np.zeros((2, 2)), st)], 1, 1.0), 1.0))
    # 5. two scalar blocks y and 1 - y: balance at 1/2
    s1 = np.ones((1, 1, 1))
    s2 = -np.ones((1, 1, 1))
    cases.append(
        (
            "balance",
            ConeProgram(
                [block(np.zeros((1, 1)), s1), block(np.ones((1, 1)), s2)], 1, 10.0
            ),
            0.5,
        )
    )
    # 6. infeasible pair: diag(y, -y-1) caps the margin at -1/2
    st = np.zeros((1, 2, 2))
    st[0] = np.diag([1.0, -1.0])
    cases.append(
        ("strictly-infeasible", ConeProgram([block(np.diag([0.0, -1.0]), st)], 1, 10.0), -0.5)
    )
    # 7. rotated coordinates: same optimum as diag(y, 2 - y)
    q = rotation(0.6)
    st = np.zeros((1, 2, 2))
    st[0] = q @ np.diag([1.0, -1.0]) @ q.T
    f0 = q @ np.diag([0.0, 2.0]) @ q.T
    cases.append(("rotated-balance", ConeProgram([block(f0, st)], 1, 10.0), 1.0))
    # 8. box-active slope: eigenvalues y and 2y - 1, maximal at y = B = 3
    st = np.zeros((1, 2, 2))
    st[0] = np.diag([1.0, 2.0])
    cases.append(
        ("box-active-slope", ConeProgram([block(np.diag([0.0, -1.0]), st)], 1, 3.0), 3.0)
    )
    # 9. three variables sharing a budget of 4: symmetric optimum at 1
    st = np.zeros((3, 4, 4))
    for i in range(3):
        st[i, i, i] = 1.0
        st[i, 3, 3] = -1.0
    cases.append(
        ("budget-split", ConeProgram([block(np.diag([0.0, 0.0, 0.0, 4.0]), st)], 3, 100.0), 1.0)
    )
    # 10. fixed off-diagonal coupling: at the box corner eigenvalues are B -+ c
    st = np.zeros((2, 2, 2))
    st[0, 0, 0] = 1.0
    st[1, 1, 1] = 1.0
    cases.append(
        (
            "coupled-corner",
            ConeProgram([block(np.array([[0.0, 0.3], [0.3, 0.0]]), st)], 2, 2.0),
            1.7,
        )
    )
    return cases


@pytest.mark.parametrize("name,program,expected", oracle_cases(), ids=[c[0] for c in oracle_cases()])
def test_oracle_margins(name, program, expected):
    result = solve(program)
    assert result.margin == pytest.approx(expected, abs=1e-7)
    if expected > 1e-6:
        assert result.status == FEASIBLE
    elif expected < -1e-6:
        assert result.status == INFEASIBLE


def test_status_three_way_rule():
    # non-homogeneous marginal program lands in the inconclusive band
    st = np.zeros((1, 2, 2))
    st[0] = np.diag([1.0, -1.0])
    res = solve(ConeProgram([block(np.zeros((2, 2)), st)], 1, 1e4))
    assert res.status in ("numerically-inconclusive", INFEASIBLE)
    assert abs(res.margin) < 1e-8


def test_determinism_bitwise():
    program = oracle_cases()[8][1]
    r1 = solve(program)
    r2 = solve(program)
    assert r1.margin == r2.margin
    assert r1.status == r2.status
    assert r1.iterations == r2.iterations
    assert np.array_equal(r1.flat_certificate, r2.flat_certificate)


def test_redundant_identity_block_is_inert():
    # adding I >= 0 cannot change a sub-unit margin
    base = oracle_cases()[4][1]  # balance, t* = 0.5 < 1
    augmented = ConeProgram(
        base.blocks + [block(np.eye(3), np.zeros((1, 3, 3)))],
        base.num_y,
        base.box_bound,
    )
    r1 = solve(base)
    r2 = solve(augmented)
    assert r2.margin == pytest.approx(r1.margin, abs=1e-7)


def test_scaling_covariance():
    base = oracle_cases()[6][1]  # rotated balance, t* = 1
    alpha = 3.7
    scaled = ConeProgram(
        [(alpha * f0, alpha * stack) for f0, stack in base.blocks],
        base.num_y,
        base.box_bound,
    )
    r1 = solve(base)
    r2 = solve(scaled)
    assert r2.margin == pytest.approx(alpha * r1.margin, rel=1e-7)


def test_rejects_invalid_programs():
    with pytest.raises(ValueError):
        ConeProgram([], 0, 1.0)
    with pytest.raises(ValueError):
        ConeProgram([block(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((0, 2, 2)))], 0, 1.0)
    with pytest.raises(ValueError):
        ConeProgram([block(np.zeros((2, 2)), np.zeros((1, 2, 2)))], 1, -1.0)
    asym = np.zeros((1, 2, 2))
    asym[0, 0, 1] = 1.0
    with pytest.raises(ValueError):
        ConeProgram([block(np.zeros((2, 2)), asym)], 1, 1.0)


def test_iteration_log_stream():
    stream = io.StringIO()
    program = oracle_cases()[0][1]
    solve(program, SolverOptions(log_stream=stream))
    lines = stream.getvalue().strip().splitlines()
    assert len(lines) >= 3
    assert all("gap=" in ln for ln in lines)


def example1_problem(tau):
    sys = DelaySystem.from_matrices(
        [[-2.0, 0.0], [0.0, -0.9]], [[-1.0, 0.0], [-1.0, -1.0]], name="example1"
    )
    return assemble_stability_lmis(sys, HierarchyParams(1, 1), tau)


def test_delay_lmi_feasibility_at_published_bounds():
    res = decide_feasibility(example1_problem(6.0))
    assert res.status == FEASIBLE
    res = decide_feasibility(example1_problem(6.2))
    assert res.status == INFEASIBLE


def test_margin_program_structure():
    prob = example1_problem(1.0)
    program = to_margin_program(prob, bound=123.0)
    assert program.num_y == prob.dim
    assert program.box_bound == 123.0
    # negative-definite constraints arrive negated
    deriv = prob.constraints[1]
    assert deriv.sense == -1
    assert np.array_equal(program.blocks[1][1], -deriv.coeffs)


def test_feasible_certificate_margin_consistency():
    # re-evaluated constraint eigenvalues must support the reported margin
    prob = example1_problem(6.0)
    res = decide_feasibility(prob)
    assert res.status == FEASIBLE
    floor = res.margin * (1 - 1e-6) - 1e-9
    for name, sense, mat in prob.evaluate_at(res.certificate):
        eigs = np.linalg.eigvalsh(mat)
        attained = eigs[0] if sense > 0 else -eigs[-1]
        assert attained >= floor, (name, attained, res.margin)


def test_certificate_roundtrip_and_tampering():
    prob = example1_problem(6.0)
    res = decide_feasibility(prob)
    assert res.status == FEASIBLE
    assert verify_certificate(prob, res)
    # zeroing the augmented quadratic form destroys the positivity block
    tampered = res.certificate.copy()
    tampered.p = np.zeros_like(tampered.p)
    res.certificate = tampered
    assert not verify_certificate(prob, res)


def test_verify_requires_feasible_result():
    prob = example1_problem(6.2)
    res = decide_feasibility(prob)
    with pytest.raises(ValueError):
        verify_certificate(prob, res)
