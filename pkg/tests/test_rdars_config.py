import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from rdars.codebook import build_connected_rcb, check_orthogonality, grid_angles
from rdars.errors import Infeasible, InvalidDimension
from rdars.rdars_config import (admissible_strides, make_mode_config, min_transmit_elements, placed_mode,
                                placement_candidates)

from conftest import LAM

D = LAM / 2


class TestModeConfig:
    def test_all_passive(self):
        m = make_mode_config(4, 4, [], D)
        assert m.a == 0 and m.b == 16
        assert not m.A.any()
        assert m.A_tilde.shape == (16, 0)

    def test_all_connected(self):
        m = make_mode_config(2, 3, [(i, j) for i in range(2) for j in range(3)], D)
        assert m.a == 6 and m.b == 0
        assert np.array_equal(m.A, np.eye(6))

    def test_flat_indices_and_sorting(self):
        m = make_mode_config(4, 4, [(2, 1), (1, 0), (1, 2)], D)
        assert m.connected == ((1, 0), (1, 2), (2, 1))
        assert list(m.connected_flat) == [4, 6, 9]
        assert m.a_z == 2 and m.a_y == 3
        assert not m.is_product

    @given(st.integers(1, 5), st.integers(1, 5), st.data())
    def test_selection_matrices(self, N_z, N_y, data):
        cells = [(i, j) for i in range(N_z) for j in range(N_y)]
        chosen = data.draw(st.lists(st.sampled_from(cells), unique=True))
        m = make_mode_config(N_z, N_y, chosen, D)
        assert np.array_equal(m.A @ m.A, m.A)
        assert np.array_equal(m.A_tilde @ m.A_tilde.T, m.A)
        assert np.array_equal(m.A_tilde.T @ m.A_tilde, np.eye(m.a))
        assert m.a + m.b == N_z * N_y

    def test_duplicate_index(self):
        with pytest.raises(InvalidDimension):
            make_mode_config(4, 4, [(1, 1), (1, 1)], D)

    @pytest.mark.parametrize("idx", [(4, 0), (0, 4), (-1, 0)])
    def test_out_of_range(self, idx):
        with pytest.raises(InvalidDimension):
            make_mode_config(4, 4, [idx], D)

    def test_equivalent_codeword_restricts_and_normalizes(self):
        m = make_mode_config(3, 3, [(0, 0), (0, 2), (2, 0)], D)
        c = np.arange(1, 5, dtype=complex)
        v = m.equivalent_codeword(c)
        assert np.allclose(v, np.array([1, 2, 3]) / math.sqrt(14))

    def test_reflection_switch(self):
        m = make_mode_config(2, 2, [(0, 0)], D)
        assert m.n_passive == 3
        assert m.without_reflection().n_passive == 0


class TestStrides:
    def test_eight_by_two(self):
        assert admissible_strides(8, 2) == [1, 3, 5, 7]

    def test_eight_by_three(self):
        assert admissible_strides(8, 3) == [1, 2]

    def test_full_axis(self):
        assert admissible_strides(8, 8) == [1]

    def test_half_axis(self):
        assert admissible_strides(8, 4) == [1]

    def test_single_element(self):
        assert admissible_strides(5, 1) == [1]

    def test_too_many(self):
        with pytest.raises(Infeasible):
            admissible_strides(4, 5)

    @given(st.integers(2, 16), st.integers(1, 6))
    def test_aperture_fits(self, n, a):
        assume(a <= n)
        for q in admissible_strides(n, a):
            assert (a - 1) * q <= n - 1
            assert math.gcd(q, a) == 1

    @given(st.integers(2, 12), st.integers(2, 12), st.integers(1, 4), st.integers(1, 4))
    def test_admissible_placements_are_orthogonal(self, N_z, N_y, a_z, a_y):
        assume(a_z <= N_z and a_y <= N_y)
        for c in placement_candidates(N_z, N_y, a_z, a_y, D):
            book = build_connected_rcb(c.coords_z, c.coords_y, a_z, a_y, LAM)
            assert check_orthogonality(book) < 1e-9

    @given(st.integers(2, 6), st.integers(2, 12))
    def test_shared_factor_breaks_orthogonality(self, a, q):
        assume(math.gcd(q, a) > 1)
        book = build_connected_rcb(np.arange(a) * q * D, [0.0], a, 1, LAM)
        assert check_orthogonality(book) >= 0.1

    def test_spread_and_compact(self):
        spread = placed_mode(8, 8, 2, 3, D, "spread")
        compact = placed_mode(8, 8, 2, 3, D, "compact")
        assert list(spread.rows) == [0, 7] and list(spread.cols) == [0, 2, 4]
        assert list(compact.rows) == [0, 1] and list(compact.cols) == [0, 1, 2]


class TestMinimumCount:
    def test_three_ue_example(self):
        vt = [-1 / 3, -0.6, 0.36]
        v = [0.4, 0.79, -0.21]
        az, ay, a = min_transmit_elements(3, vt, v)
        assert (az, ay) == (8, 6) or a == az * ay
        assert az == max(3, math.ceil(2 / (0.6 - 1 / 3)))

    def test_counts_for_worked_geometry(self):
        vt = [0.1, 0.5, 0.9]
        v = [-0.6, 0.0, 0.6]
        assert min_transmit_elements(3, vt, v) == (5, 4, 20)

    def test_single_ue(self):
        assert min_transmit_elements(1, [0.3], [0.2]) == (1, 1, 1)

    def test_two_ue_endpoints(self):
        assert min_transmit_elements(2, [-1, 1], [-1, 1]) == (2, 2, 4)

    def test_gap_exactly_divides(self):
        # 2 / 0.25 is exactly 8; rounding noise must not push it to 9
        assert min_transmit_elements(2, [0.1, 0.35], [0.0, 0.5])[0] == 8

    def test_shared_angle(self):
        with pytest.raises(Infeasible):
            min_transmit_elements(2, [0.3, 0.3], [0.1, 0.5])

    def test_exceeds_grid(self):
        with pytest.raises(Infeasible):
            min_transmit_elements(2, [0.0, 0.01], [0.0, 0.5], N_z=16, N_y=16)

    def test_bad_inputs(self):
        with pytest.raises(InvalidDimension):
            min_transmit_elements(0, [], [])
        with pytest.raises(InvalidDimension):
            min_transmit_elements(2, [0.1], [0.1, 0.2])

    @given(st.lists(st.floats(-0.99, 0.99), min_size=3, max_size=3, unique=True),
           st.lists(st.floats(-0.99, 0.99), min_size=3, max_size=3, unique=True),
           st.floats(0.05, 0.9))
    def test_squeezing_never_lowers_count(self, vt, v, shrink):
        assume(min(abs(x - y) for i, x in enumerate(vt) for y in vt[i + 1:]) > 1e-3)
        assume(min(abs(x - y) for i, x in enumerate(v) for y in v[i + 1:]) > 1e-3)
        base = min_transmit_elements(3, vt, v)
        squeezed = min_transmit_elements(3, [x * shrink for x in vt], v)
        assert squeezed[0] >= base[0] and squeezed[1] == base[1]

    @given(st.lists(st.floats(-0.99, 0.99), min_size=2, max_size=4, unique=True))
    def test_minimum_separates_bins(self, angles):
        K = len(angles)
        assume(min(abs(x - y) for i, x in enumerate(angles) for y in angles[i + 1:]) > 1e-3)
        az, _, _ = min_transmit_elements(K, angles, angles)
        g = grid_angles(az)
        bins = [int(np.argmin(np.abs(g - x))) for x in angles]
        assert len(set(bins)) == K
