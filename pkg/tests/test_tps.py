import numpy as np
import pytest

from sldkit import estimation as est, probes, tps
from sldkit.errors import NotAntisymmetric, OddDimension
from sldkit.states import DensityMatrix

from oracles import SY, random_qualifying_family


def qualifying_tps(rng, dim):
    fam, p, g = random_qualifying_family(rng, dim)
    sr = est.sld(fam.state(0.0), fam.derivative(0.0))
    return fam, sr, tps.tps_decompose(sr)


class TestDecompose:
    def test_single_pair_sigma_y(self):
        alpha = 0.8
        sr = est.SldResult(
            lmatrix=alpha * SY,
            alphas=np.array([alpha, -alpha]),
            vectors=np.linalg.eigh(alpha * SY)[1][:, ::-1],
            support_rank=2,
        )
        dec = tps.tps_decompose(sr)
        assert np.allclose(dec.alphas, [alpha])
        assert np.abs(dec.sy - SY).max() < 1e-12
        assert np.abs(dec.lmatrix() - alpha * SY).max() < 1e-12

    def test_odd_dimension_rejected(self):
        l = np.zeros((3, 3), dtype=complex)
        sr = est.SldResult(l, np.zeros(3), np.eye(3, dtype=complex), 3)
        with pytest.raises(OddDimension):
            tps.tps_decompose(sr)

    def test_real_part_rejected(self):
        l = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        sr = est.SldResult(l, np.array([1.0, -1.0]), np.eye(2, dtype=complex), 2)
        with pytest.raises(NotAntisymmetric):
            tps.tps_decompose(sr)

    def test_ghz_m2_sector_eigenvalues(self):
        # uniform two-qubit GHZ mixture: the SLD eigenvalues are
        # +-2(M - 2|k|) per sector, i.e. {+-4, 0, 0} (full-space oracle:
        # the defining equation fixes the magnitudes)
        mixture = probes.GhzMixture.uniform_over_sectors(2)
        fam = probes.ghz_family(mixture)
        sr = est.sld(fam.state(0.0), fam.derivative(0.0))
        assert np.allclose(np.sort(np.abs(sr.alphas)), [0.0, 0.0, 4.0, 4.0], atol=1e-9)

    def test_random_reconstruction_and_algebra(self):
        rng = np.random.default_rng(71)
        for dim in (4, 6):
            fam, sr, dec = qualifying_tps(rng, dim)
            scale = max(1.0, np.abs(sr.lmatrix).max())
            assert np.abs(dec.lmatrix() - sr.lmatrix).max() <= 1e-9 * scale
            # pair structure of the real basis
            vp = (dec.real_basis[:, 0::2] + 1j * dec.real_basis[:, 1::2]) / np.sqrt(2)
            assert np.abs(vp - dec.plus_vectors).max() <= 1e-9
            eye = np.eye(dim)
            for s in (dec.sx, dec.sy, dec.sz):
                assert np.abs(s @ s - eye).max() <= 1e-9
                for proj in dec.projectors:
                    assert np.abs(s @ proj - proj @ s).max() <= 1e-12
            assert np.abs(dec.sx @ dec.sy - 1j * dec.sz).max() <= 1e-9
            # multiset symmetry of the SLD spectrum
            spectrum = np.sort(sr.alphas)
            assert np.abs(spectrum + spectrum[::-1]).max() <= 1e-9 * scale

    def test_zero_mode_pairing(self):
        # rank-2 SLD from the norm-constrained optimal generator
        p = np.array([0.4, 0.3, 0.2, 0.1])
        g, _ = probes.max_qfi_generator(p, 1.0)
        fam = est.StateFamily.unitary(np.diag(p).astype(complex), g)
        sr = est.sld(fam.state(0.0), fam.derivative(0.0))
        dec = tps.tps_decompose(sr)
        assert dec.n_sectors == 2
        assert np.abs(dec.lmatrix() - sr.lmatrix).max() <= 1e-9
        assert np.abs(dec.real_basis.imag if np.iscomplexobj(dec.real_basis)
                      else 0.0).max() == 0.0


class TestProbTable:
    def test_factorized_at_reference_point(self):
        rng = np.random.default_rng(73)
        fam, sr, dec = qualifying_tps(rng, 6)
        table = tps.joint_probs(fam.state(0.0), dec)
        outer = np.outer(table.qubit_marginal, table.sector_marginal)
        assert np.abs(table.joint - outer).max() <= 1e-10
        assert np.abs(table.joint[0] - table.joint[1]).max() <= 1e-10
        assert np.abs(table.qubit_marginal - 0.5).max() <= 1e-10
        assert abs(table.total - 1.0) <= 1e-9

    def test_maximally_mixed_uniform(self):
        rng = np.random.default_rng(79)
        _, _, dec = qualifying_tps(rng, 4)
        table = tps.joint_probs(DensityMatrix.maximally_mixed(4).matrix, dec)
        assert np.abs(table.joint - 0.25).max() <= 1e-12

    def test_ghz_m3_joint_closed_form(self):
        lam = 0.1
        mixture = probes.GhzMixture.uniform_over_sectors(3)
        fam = probes.ghz_family(mixture)
        dec = probes.ghz_structural_tps(3)
        table = tps.joint_probs(fam.state(lam), dec)
        p_k = mixture.sector_weights()
        for k in range(4):
            m = 3 - 2 * bin(k).count("1")
            expect_plus = 0.5 * (1 + np.sin(2 * lam * m)) * p_k[bin(k).count('1')]
            expect_minus = 0.5 * (1 - np.sin(2 * lam * m)) * p_k[bin(k).count('1')]
            assert abs(table.joint[0, k] - expect_plus) < 1e-12
            assert abs(table.joint[1, k] - expect_minus) < 1e-12

    def test_mutual_info_values(self):
        factorized = tps.ProbTable(np.outer([0.5, 0.5], [0.3, 0.7]))
        assert abs(tps.mutual_info(factorized)) <= 1e-12
        correlated = tps.ProbTable(np.array([[0.5, 0.0], [0.0, 0.5]]))
        assert abs(tps.mutual_info(correlated) - np.log(2.0)) < 1e-14

    def test_mutual_info_ghz_entropy_arithmetic(self):
        lam = 0.1
        mixture = probes.GhzMixture.uniform_over_sectors(3)
        table = tps.joint_probs(probes.ghz_family(mixture).state(lam),
                                probes.ghz_structural_tps(3))
        def entropy(p):
            p = np.asarray(p).ravel()
            p = p[p > 0]
            return -(p * np.log(p)).sum()
        expect = (entropy(table.joint.sum(axis=1)) + entropy(table.joint.sum(axis=0))
                  - entropy(table.joint))
        assert abs(tps.mutual_info(table) - expect) < 1e-14
        assert tps.mutual_info(table) >= -1e-12


class TestSplit:
    def test_separable_class_has_no_correlation_term(self):
        sc = probes.SeparableClass(
            weights=[0.5, 0.5], lengths=[1.0, 1.0],
            azimuths=[0.0, 1.1], tilts=[np.pi / 2, np.pi / 2],
        )
        fam = probes.separable_family(sc)
        dec = probes.separable_structural_tps(sc)
        split = tps.qfi_split(fam, dec, 0.0)
        assert abs(split.mi_curvature) <= 1e-6
        assert abs(split.fi2 - split.qfi) <= 1e-4 * max(1.0, split.qfi)

    def test_pure_ghz(self):
        fam = probes.ghz_family(probes.GhzMixture.pure(3))
        split = tps.qfi_split(fam, probes.ghz_structural_tps(3), 0.0)
        assert abs(split.qfi - 36.0) <= 1e-8
        assert abs(split.fi2 - 36.0) <= 1e-4 * 36.0
        assert abs(split.mi_curvature) <= 1e-4 * 36.0

    def test_ghz_m3_uniform_mixture(self):
        fam = probes.ghz_family(probes.GhzMixture.uniform_over_sectors(3))
        split = tps.qfi_split(fam, probes.ghz_structural_tps(3), 0.0)
        assert abs(split.qfi - 12.0) <= 1e-9
        assert abs(split.fi2 - 4.0) <= 1e-6 * 4.0
        assert abs(split.mi_curvature - 8.0) <= 1e-4 * 12.0
        assert abs(split.mutual_at_center) <= 1e-12
        assert abs(split.mutual_slope) <= 1e-8

    def test_split_identity_random(self):
        rng = np.random.default_rng(83)
        for _ in range(10):
            dim = int(rng.choice([4, 6, 8]))
            fam, sr, dec = qualifying_tps(rng, dim)
            split = tps.qfi_split(fam, dec, 0.0)
            assert abs(split.qfi - split.fi2 - split.mi_curvature) <= 1e-4 * max(1.0, split.qfi)
            assert split.mi_curvature >= -1e-6


class TestReducedQubit:
    def test_product_state_reduces_to_qubit_factor(self):
        # all sectors carry the same qubit state: xi equals it
        tau_bloch = np.array([0.6, 0.0, 0.0])
        sc = probes.SeparableClass(
            weights=[0.3, 0.7], lengths=[0.6, 0.6],
            azimuths=[0.0, 0.0], tilts=[np.pi / 2, np.pi / 2],
        )
        fam = probes.separable_family(sc)
        dec = probes.separable_structural_tps(sc)
        xi = tps.reduced_qubit(fam.state(0.0), dec)
        # Bloch length of the factor is preserved by the re-factorization
        ev = np.linalg.eigvalsh(xi.matrix)
        assert abs((ev[1] - ev[0]) - np.linalg.norm(tau_bloch)) < 1e-10

    def test_pure_ghz_reduced_qubit_qfi(self):
        for m in (2, 3):
            fam = probes.ghz_family(probes.GhzMixture.pure(m))
            dec = probes.ghz_structural_tps(m)
            qfi_xi = tps.reduced_qubit_qfi(fam, dec, 0.0)
            assert abs(qfi_xi - 4 * m**2) <= 1e-6 * 4 * m**2

    def test_ghz_mixture_bound_chain(self):
        fam = probes.ghz_family(probes.GhzMixture.uniform_over_sectors(3))
        dec = probes.ghz_structural_tps(3)
        split = tps.qfi_split(fam, dec, 0.0)
        qfi_xi = tps.reduced_qubit_qfi(fam, dec, 0.0)
        assert split.fi2 <= qfi_xi + 1e-9
        assert qfi_xi <= split.qfi + 1e-9
        assert abs(split.fi2 - 4.0) < 1e-5 and abs(split.qfi - 12.0) < 1e-9

    def test_bound_chain_random(self):
        rng = np.random.default_rng(89)
        for _ in range(8):
            dim = int(rng.choice([4, 6, 8]))
            fam, sr, dec = qualifying_tps(rng, dim)
            split = tps.qfi_split(fam, dec, 0.0)
            qfi_xi = tps.reduced_qubit_qfi(fam, dec, 0.0)
            assert split.fi2 <= qfi_xi + 1e-6
            assert qfi_xi <= split.qfi + 1e-6
