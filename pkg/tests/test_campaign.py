import dataclasses

import numpy as np
import pytest

from ionload import analysis, campaign as camp, ionization as ion
from ionload.config import SCHEME_AUTOIONIZING, SCHEME_NONRESONANT


def small_campaign(rc, name=SCHEME_AUTOIONIZING, n_pulses=20, **replacements):
    c = rc.campaign(name, n_pulses=n_pulses)
    return dataclasses.replace(c, **replacements) if replacements else c


def make_outcome(index, by_isotope, direct=0, fluor=0.0, n_atoms=500):
    return camp.PulseOutcome(
        pulse_index=index,
        n_atoms=n_atoms,
        trapped_by_isotope=by_isotope,
        direct_ions=direct,
        neutral_fluorescence_counts=fluor,
        seed_path=f"1:{index}",
    )


class TestRunPulse:
    def test_deterministic(self, rc):
        c = small_campaign(rc)
        assert camp.run_pulse(c, 3) == camp.run_pulse(c, 3)

    def test_seed_path(self, rc):
        c = small_campaign(rc)
        out = camp.run_pulse(c, 7)
        assert out.seed_path == f"{c.master_seed}:7"
        assert out.pulse_index == 7

    def test_index_bounds(self, rc):
        c = small_campaign(rc, n_pulses=5)
        with pytest.raises(ValueError):
            camp.run_pulse(c, -1)
        with pytest.raises(ValueError):
            camp.run_pulse(c, 5)

    def test_pulses_differ(self, rc):
        c = small_campaign(rc)
        atom_counts = {camp.run_pulse(c, i).n_atoms for i in range(6)}
        assert len(atom_counts) > 1

    def test_below_threshold_pulse_is_empty(self, rc):
        c = small_campaign(rc, fluence_j_cm2=0.1)
        out = camp.run_pulse(c, 0)
        assert out.n_atoms == 0
        assert out.n_trapped == 0
        assert out.direct_ions == 0
        assert out.neutral_fluorescence_counts == 0.0

    def test_fluorescence_scales_with_collection(self, rc):
        c = small_campaign(rc, n_pulses=4)
        doubled = dataclasses.replace(
            c, fluorescence_collection=2 * c.fluorescence_collection
        )
        for i in range(4):
            a = camp.run_pulse(c, i)
            b = camp.run_pulse(doubled, i)
            assert b.neutral_fluorescence_counts == 2 * a.neutral_fluorescence_counts
            assert b.trapped_by_isotope == a.trapped_by_isotope

    def test_capacity_cap_and_arrival_priority(self, rc):
        # a generous scheme at high fluence overfills the trap; the cap
        # keeps the earliest arrivals, so the capacity-1 ion census is
        # contained in the capacity-13 census pulse by pulse
        base = small_campaign(rc, n_pulses=6, fluence_j_cm2=0.5)
        greedy = dataclasses.replace(
            base, scheme=dataclasses.replace(base.scheme, capture_efficiency=1.0)
        )
        tiny = dataclasses.replace(
            greedy, scheme=dataclasses.replace(greedy.scheme, trap_capacity=1)
        )
        for i in range(6):
            big = camp.run_pulse(greedy, i)
            one = camp.run_pulse(tiny, i)
            assert big.n_trapped <= greedy.scheme.trap_capacity
            assert one.n_trapped <= 1
            for mass, count in one.trapped_by_isotope.items():
                assert big.trapped_by_isotope.get(mass, 0) >= count
        counts = [camp.run_pulse(greedy, i).n_trapped for i in range(6)]
        assert max(counts) == greedy.scheme.trap_capacity


class TestCampaignConfigValidation:
    def test_bad_values(self, rc):
        with pytest.raises(ValueError):
            small_campaign(rc, n_pulses=0)
        with pytest.raises(ValueError):
            small_campaign(rc, fluence_j_cm2=-0.1)
        with pytest.raises(ValueError):
            small_campaign(rc, fluorescence_collection=-1.0)


class TestRunCampaign:
    def test_worker_count_is_invisible(self, rc):
        c = small_campaign(rc, n_pulses=12)
        serial = camp.run_campaign(c)
        parallel = camp.run_campaign(c, workers=2)
        assert serial.outcomes == parallel.outcomes
        assert serial.summary == parallel.summary

    def test_summary_matches_summarize(self, auto_campaign):
        result, _ = auto_campaign
        assert camp.summarize(result.outcomes) == result.summary

    def test_monte_carlo_matches_analytic_rate(self, rc, auto_campaign, nonres_campaign):
        # the campaign mean must sit within 3 standard errors of the
        # deterministic expectation
        for name, (result, _) in (
            (SCHEME_AUTOIONIZING, auto_campaign),
            (SCHEME_NONRESONANT, nonres_campaign),
        ):
            prof = rc.profile(name)
            plume_model = dataclasses.replace(rc.plume, flux_scale=prof.flux_scale)
            expected = ion.expected_ions_per_pulse(
                prof.scheme, rc.catalog, plume_model, rc.fluence_j_cm2
            )
            s = result.summary
            assert abs(s.mean_ions - expected) < 3 * s.sem_ions

    def test_no_direct_ions_at_default_fluence(self, auto_campaign, nonres_campaign):
        for result, _ in (auto_campaign, nonres_campaign):
            assert result.summary.total_direct_ions == 0


class TestSummarize:
    def test_handcrafted_census(self):
        outcomes = [
            make_outcome(0, {138: 3}, direct=0, fluor=10.0),
            make_outcome(1, {138: 1, 137: 1}, direct=1, fluor=20.0),
            make_outcome(2, {138: 1}, direct=0, fluor=30.0),
            make_outcome(3, {}, direct=2, fluor=40.0),
        ]
        s = camp.summarize(outcomes)
        assert s.n_pulses == 4
        assert s.mean_ions == pytest.approx(1.5)
        assert s.median_ions == pytest.approx(1.5)
        assert s.histogram == (1, 1, 1, 1)
        assert s.total_ions == 6
        assert s.total_direct_ions == 3
        assert s.success_fraction == pytest.approx(0.75)
        assert s.mean_fluorescence == pytest.approx(25.0)
        assert s.trapped_by_isotope == {138: 5, 137: 1}
        # pulses with >= 2 ions hold 3 + 2 = 5 ions, one of them non-138
        assert s.multi_ion_impurity_fraction == pytest.approx(0.2)
        assert s.poisson_lambda == pytest.approx(1.5)
        assert s.sem_ions == pytest.approx(analysis.sem([3, 2, 1, 0]), rel=1e-12)

    def test_impurity_undefined_without_multi_ion_pulses(self):
        outcomes = [make_outcome(0, {138: 1}), make_outcome(1, {})]
        assert camp.summarize(outcomes).multi_ion_impurity_fraction is None

    def test_single_pulse(self):
        s = camp.summarize([make_outcome(0, {138: 2})])
        assert s.sem_ions == 0.0
        assert s.mean_ions == 2.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            camp.summarize([])

    def test_census_consistent_with_outcomes(self, auto_campaign):
        result, _ = auto_campaign
        s = result.summary
        totals = [o.n_trapped for o in result.outcomes]
        assert s.total_ions == sum(totals)
        assert s.success_fraction == pytest.approx(
            np.mean([t >= 1 for t in totals]), rel=1e-12
        )
        multi_total = sum(t for t in totals if t >= 2)
        multi_impure = sum(
            c
            for o in result.outcomes
            if o.n_trapped >= 2
            for m, c in o.trapped_by_isotope.items()
            if m != 138
        )
        if multi_total:
            assert s.multi_ion_impurity_fraction == pytest.approx(
                multi_impure / multi_total, rel=1e-12
            )
        by_iso = {}
        for o in result.outcomes:
            for m, c in o.trapped_by_isotope.items():
                by_iso[m] = by_iso.get(m, 0) + c
        assert s.trapped_by_isotope == by_iso


class TestPowerSweep:
    @pytest.mark.parametrize("name", [SCHEME_AUTOIONIZING, SCHEME_NONRESONANT])
    def test_fused_path_matches_naive(self, rc, name):
        c = small_campaign(rc, name, n_pulses=15)
        grid = [0.45e-3, c.scheme.second_step.power_w, 2.1e-3]
        points = camp.sweep(c, "second_step_power", grid)
        for x, point in zip(grid, points):
            naive = camp.run_campaign(
                dataclasses.replace(
                    c,
                    scheme=dataclasses.replace(
                        c.scheme,
                        second_step=dataclasses.replace(
                            c.scheme.second_step, power_w=x
                        ),
                    ),
                )
            )
            assert point.x == x
            assert point.mean_ions == naive.summary.mean_ions
            assert point.sem_ions == naive.summary.sem_ions
            assert point.total_direct_ions == naive.summary.total_direct_ions
            assert point.n_pulses == 15

    def test_workers_do_not_change_sweep(self, rc):
        c = small_campaign(rc, n_pulses=10)
        grid = [0.6e-3, 1.2e-3, 1.8e-3]
        assert camp.sweep(c, "second_step_power", grid) == camp.sweep(
            c, "second_step_power", grid, workers=2
        )

    def test_grid_validation(self, rc):
        c = small_campaign(rc, n_pulses=2)
        with pytest.raises(ValueError):
            camp.sweep(c, "second_step_power", [])
        with pytest.raises(ValueError):
            camp.sweep(c, "second_step_power", [1e-3, 1e-3])
        with pytest.raises(ValueError):
            camp.sweep(c, "second_step_power", [2e-3, 1e-3])
        with pytest.raises(ValueError):
            camp.sweep(c, "detuning", [1.0, 2.0])

    def test_nonresonant_grid_is_linear(self, rc):
        # boosted sensitivity keeps counting noise ~1% of the range:
        # unit capture efficiency, a hotter first step, and no trap cap
        prof = rc.profile(SCHEME_NONRESONANT)
        scheme = dataclasses.replace(
            prof.scheme,
            capture_efficiency=1.0,
            trap_capacity=10**6,
            first_step=dataclasses.replace(prof.scheme.first_step, power_w=50e-6),
        )
        c = dataclasses.replace(
            rc.campaign(SCHEME_NONRESONANT, n_pulses=600), scheme=scheme
        )
        grid = [p * 1e-3 for p in rc.sweeps.power_grids_mw[SCHEME_NONRESONANT]]
        points = camp.sweep(c, "second_step_power", grid)
        x = np.array([p.x for p in points])
        y = np.array([p.mean_ions for p in points])
        s = np.array([p.sem_ions for p in points])
        fit = analysis.fit_linear(x, y, s)
        pred = fit.params["m"] * x + fit.params["c"]
        span = y.max() - y.min()
        assert np.max(np.abs(y - pred)) / span < 0.02


class TestFluenceSweep:
    def test_regimes_and_direct_ions(self, rc):
        c = small_campaign(rc, n_pulses=30)
        points = camp.sweep(c, "fluence", [0.25, 0.45, 0.5])
        by_x = {p.x: p for p in points}
        # Region II outproduces the near-threshold point
        assert by_x[0.45].mean_ions > by_x[0.25].mean_ions
        # ablation-produced ions appear only above 0.45 J/cm^2
        assert by_x[0.25].total_direct_ions == 0
        assert by_x[0.45].total_direct_ions == 0
        assert by_x[0.5].total_direct_ions > 0

    def test_points_reproduce_standalone_campaigns(self, rc):
        c = small_campaign(rc, n_pulses=8)
        points = camp.sweep(c, "fluence", [0.3, 0.4])
        for p in points:
            ref = camp.run_campaign(dataclasses.replace(c, fluence_j_cm2=p.x))
            assert p.mean_ions == ref.summary.mean_ions
            assert p.sem_ions == ref.summary.sem_ions
