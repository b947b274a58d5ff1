import csv
import io
import math
from fractions import Fraction as F

import numpy as np
import pytest

from heisenlab.algebra import DiscreteSubgroup, GroupElement
from heisenlab.gaussian import GaussianPacket, quadrature_inner_product, tf_shift
from heisenlab.independence import (
    CERTIFIED,
    CSV_COLUMNS,
    CosetWindow,
    certify,
    density_sweep,
    enumerate_coset,
    gram_matrix,
    grid_points,
    rows_to_csv,
    worker_count,
)

from randgen import group_element, packet

PHI = GaussianPacket.standard(1)
Z2 = DiscreteSubgroup.standard(1)
HALF = DiscreteSubgroup(1, [GroupElement([F(1, 2)], [0]), GroupElement([0], [1])])


def pt(x, y):
    return GroupElement([x], [y])


class TestEnumeration:
    def test_ball_counts(self):
        pts = enumerate_coset(CosetWindow(Z2, radius=1.5))
        assert len(pts) == 9 and not pts.truncated
        assert {(p.x[0], p.y[0]) for p in pts} == {(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)}
        assert len(enumerate_coset(CosetWindow(DiscreteSubgroup(1, [pt(1, 0)]), radius=2.5))) == 5

    def test_radius_zero(self):
        off = pt(F(1, 3), F(2, 7))
        assert enumerate_coset(CosetWindow(Z2, off, radius=0)) == [off]

    def test_lexicographic_and_unique(self):
        pts = enumerate_coset(CosetWindow(HALF, pt(F(1, 5), 0), radius=2))
        assert len(set(pts)) == len(pts)
        assert pts[0] == pt(F(1, 5) - 2, 0)
        coeffs = [(2 * (p.x[0] - F(1, 5)), p.y[0]) for p in pts]
        assert coeffs == sorted(coeffs)

    def test_truncation_flag(self):
        pts = enumerate_coset(CosetWindow(Z2, radius=3, max_points=5))
        assert len(pts) == 5 and pts.truncated
        rep = certify(pts, PHI)
        assert rep.truncated and rep.to_dict()["truncated"]

    def test_grid(self):
        assert len(grid_points(Z2, 3)) == 9
        assert len(grid_points(DiscreteSubgroup(2, [GroupElement([1, 0], [0, 0])]), 4)) == 4


class TestGram:
    def test_single_point(self):
        g = gram_matrix([pt(0, 0)], PHI)
        assert g.shape == (1, 1) and abs(g[0, 0] - 2 ** -0.5) < 1e-15

    def test_far_apart(self):
        rep = certify([pt(0, 0), pt(10, 0)], PHI)
        assert abs(rep.gram[0, 1]) < 1e-12
        assert abs(rep.lambda_min - 2 ** -0.5) < 1e-12

    def test_hermitian_constant_diagonal(self):
        rng = np.random.default_rng(0)
        f = packet(rng, 1)
        g = gram_matrix(grid_points(HALF, 3, pt(F(1, 3), F(1, 7))), f)
        assert np.array_equal(g, g.conj().T)
        nrm2 = g[0, 0].real
        assert np.max(np.abs(np.diag(g) - nrm2)) < 1e-12 * nrm2

    def test_entries_against_quadrature(self):
        pts = grid_points(Z2, 3)
        g = gram_matrix(pts, PHI)
        for i, j in [(0, 4), (2, 7), (8, 3)]:
            q = quadrature_inner_product(tf_shift(pts[i], PHI), tf_shift(pts[j], PHI), nodes=300)
            assert abs(g[i, j] - q) < 1e-8

    def test_threads_do_not_change_result(self, monkeypatch):
        pts = grid_points(HALF, 4)
        serial = gram_matrix(pts, PHI, threads=1)
        monkeypatch.setenv("HEISENLAB_THREADS", "4")
        assert worker_count() == 4
        assert np.array_equal(gram_matrix(pts, PHI), serial)


class TestCertify:
    def test_grid_certified(self):
        rep = certify(grid_points(Z2, 3), PHI)
        assert rep.verdict == CERTIFIED and rep.lambda_min > 1e-8
        v = rep.eigenvector
        assert np.linalg.norm(rep.gram @ v - rep.lambda_min * v) <= rep.residual * (1 + 1e-12)

    def test_single_point_any_window(self):
        assert certify([pt(1, 2)], packet(np.random.default_rng(1), 1)).certified

    def test_report_fields(self):
        d = certify(grid_points(Z2, 2), PHI).to_dict()
        assert d["num_points"] == 4 and d["eigenvalues"] == sorted(d["eigenvalues"])
        assert d["cond"] >= 1 and d["verdict"] == CERTIFIED

    def test_inconclusive_when_margin_fails(self):
        rep = certify(grid_points(HALF, 5), PHI, kappa=1e20)
        assert rep.verdict == "inconclusive"

    def test_psd(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            rep = certify(grid_points(HALF, 4, group_element(rng, 1)), packet(rng, 1))
            assert rep.lambda_min >= -1e-12

    def test_coset_invariance(self):
        rng = np.random.default_rng(3)
        base = certify(grid_points(Z2, 3), PHI).eigenvalues
        for _ in range(20):
            off = group_element(rng, 1)
            shifted = certify(grid_points(Z2, 3, off), PHI).eigenvalues
            assert np.max(np.abs(shifted - base)) < 1e-9

    def test_subset_monotone(self):
        rng = np.random.default_rng(4)
        f = packet(rng, 1)
        prev = math.inf
        for side in (1, 2, 3, 4, 5):
            lam = certify(grid_points(HALF, side), f).lambda_min
            assert lam <= prev + 1e-12
            prev = lam


class TestSweep:
    def test_rows(self):
        rows = density_sweep([(1, 1)], PHI, [3])
        assert rows[0]["num_points"] == 9 and float(rows[0]["lambda_min"]) > 0

    def test_sparse_lattice_near_orthogonal(self):
        nrm2 = 2 ** -0.5
        for side in (2, 3):
            rows = density_sweep([(2, 2)], PHI, [side])
            assert abs(float(rows[0]["lambda_min"]) - nrm2) < 0.1 * nrm2

    def test_csv_deterministic(self):
        a = rows_to_csv(density_sweep([(1, 1), (F(1, 2), 1), (1, 1)], PHI, [2, 3]))
        b = rows_to_csv(density_sweep([(1, 1), (F(1, 2), 1), (1, 1)], PHI, [2, 3]))
        assert a == b
        rows = list(csv.DictReader(io.StringIO(a)))
        assert list(rows[0]) == CSV_COLUMNS
        assert rows[0] == rows[4] and rows[1] == rows[5]

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            density_sweep([(0, 1)], PHI, [2])
