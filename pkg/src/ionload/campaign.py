"""Monte Carlo loading campaigns: ablation pulses to trapped-ion counts.

Every pulse draws from its own random stream derived from
(master_seed, pulse_index), so a campaign is bit-reproducible and the
outcome list does not depend on how many workers executed it.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .catalog import AtomicCatalog, default_catalog
from .ionization import (
    SchemeConfig,
    capture_gate,
    chord_core,
    rates_from_core,
    transit_rates,
)
from .plume import PlumeModel, direct_ion_yield, neutral_yield, sample_atoms

__all__ = [
    "CampaignConfig",
    "PulseOutcome",
    "CampaignSummary",
    "CampaignResult",
    "SweepPoint",
    "run_pulse",
    "run_campaign",
    "summarize",
    "sweep",
]


@dataclass(frozen=True)
class CampaignConfig:
    """A fixed-length sequence of ablation-and-trap attempts."""

    scheme: SchemeConfig
    plume: PlumeModel
    fluence_j_cm2: float
    n_pulses: int
    master_seed: int
    fluorescence_collection: float = 1.0
    catalog: AtomicCatalog = field(default_factory=default_catalog)

    def __post_init__(self) -> None:
        if self.n_pulses < 1:
            raise ValueError("n_pulses must be at least 1")
        if self.fluence_j_cm2 < 0.0:
            raise ValueError("fluence must be non-negative")
        if self.fluorescence_collection < 0.0:
            raise ValueError("collection constant must be non-negative")


@dataclass(frozen=True)
class PulseOutcome:
    """What one ablation pulse produced."""

    pulse_index: int
    n_atoms: int
    trapped_by_isotope: dict[int, int]
    direct_ions: int
    neutral_fluorescence_counts: float
    seed_path: str

    @property
    def n_trapped(self) -> int:
        return sum(self.trapped_by_isotope.values())


def run_pulse(campaign: CampaignConfig, pulse_index: int) -> PulseOutcome:
    """Simulate one pulse; pure function of (campaign, pulse_index)."""
    if not 0 <= pulse_index < campaign.n_pulses:
        raise ValueError(f"pulse_index {pulse_index} outside campaign")
    seq = np.random.SeedSequence(campaign.master_seed, spawn_key=(pulse_index,))
    rng = np.random.Generator(np.random.PCG64(seq))
    seed_path = f"{campaign.master_seed}:{pulse_index}"

    _, n_atoms = neutral_yield(campaign.plume, campaign.fluence_j_cm2, rng)
    trapped: dict[int, int] = {}
    fluorescence = 0.0
    if n_atoms > 0:
        cat = campaign.catalog
        masses = np.array([i.mass_number for i in cat.isotopes])
        abund = np.array([i.abundance for i in cat.isotopes])
        batch = sample_atoms(campaign.plume, n_atoms, masses, abund, rng)
        rates = transit_rates(campaign.scheme, cat, batch)
        p_trap = _trap_probabilities(campaign.scheme, rates.a_exp)
        hits = np.flatnonzero(rng.random(n_atoms) < p_trap)
        if hits.size:
            # the trap fills in arrival order and then stops accepting
            order = hits[np.argsort(batch.arrival_time_s[hits], kind="stable")]
            kept = order[: campaign.scheme.trap_capacity]
            for mass in batch.mass_number[kept]:
                m = int(mass)
                trapped[m] = trapped.get(m, 0) + 1
        decay_rate = 2.0 * math.pi * campaign.scheme.first_step.transition.linewidth_hz
        fluorescence = float(
            campaign.fluorescence_collection * decay_rate * rates.excited_dose_s.sum()
        )

    mean_direct = direct_ion_yield(campaign.plume, campaign.fluence_j_cm2)
    direct = int(rng.poisson(mean_direct)) if mean_direct > 0.0 else 0
    return PulseOutcome(
        pulse_index=pulse_index,
        n_atoms=n_atoms,
        trapped_by_isotope=trapped,
        direct_ions=direct,
        neutral_fluorescence_counts=fluorescence,
        seed_path=seed_path,
    )


def _trap_probabilities(scheme: SchemeConfig, a_exp: np.ndarray) -> np.ndarray:
    gate = capture_gate(
        scheme.second_step.power_w,
        scheme.capture_threshold_w,
        scheme.capture_threshold_exponent,
    )
    return scheme.capture_efficiency * gate * -np.expm1(-a_exp)


@dataclass(frozen=True)
class CampaignSummary:
    """Aggregate statistics over a campaign's pulses."""

    n_pulses: int
    mean_ions: float
    sem_ions: float
    median_ions: float
    histogram: tuple[int, ...]
    poisson_lambda: float
    poisson_lambda_sigma: float
    gof_chi2: float
    gof_dof: int
    gof_p_value: float
    success_fraction: float
    mean_fluorescence: float
    total_ions: int
    total_direct_ions: int
    trapped_by_isotope: dict[int, int]
    multi_ion_impurity_fraction: float | None


@dataclass(frozen=True)
class CampaignResult:
    outcomes: tuple[PulseOutcome, ...]
    summary: CampaignSummary


def summarize(outcomes: list[PulseOutcome] | tuple[PulseOutcome, ...]) -> CampaignSummary:
    if not outcomes:
        raise ValueError("no outcomes to summarize")
    totals = np.array([o.n_trapped for o in outcomes])
    n = totals.size
    fit, gof = analysis.poisson_mle(totals)
    by_isotope: dict[int, int] = {}
    for o in outcomes:
        for mass, count in o.trapped_by_isotope.items():
            by_isotope[mass] = by_isotope.get(mass, 0) + count

    multi_total = 0
    multi_impure = 0
    for o in outcomes:
        if o.n_trapped >= 2:
            multi_total += o.n_trapped
            multi_impure += sum(
                c for mass, c in o.trapped_by_isotope.items() if mass != 138
            )
    impurity = multi_impure / multi_total if multi_total else None

    return CampaignSummary(
        n_pulses=n,
        mean_ions=float(totals.mean()),
        sem_ions=analysis.sem(totals) if n >= 2 else 0.0,
        median_ions=float(np.median(totals)),
        histogram=tuple(int(c) for c in np.bincount(totals)),
        poisson_lambda=fit.params["lambda"],
        poisson_lambda_sigma=fit.sigmas["lambda"],
        gof_chi2=gof.chi2,
        gof_dof=gof.dof,
        gof_p_value=gof.p_value,
        success_fraction=float(np.mean(totals >= 1)),
        mean_fluorescence=float(
            np.mean([o.neutral_fluorescence_counts for o in outcomes])
        ),
        total_ions=int(totals.sum()),
        total_direct_ions=int(sum(o.direct_ions for o in outcomes)),
        trapped_by_isotope=by_isotope,
        multi_ion_impurity_fraction=impurity,
    )


def _pulse_task(args: tuple[CampaignConfig, int]) -> PulseOutcome:
    campaign, index = args
    return run_pulse(campaign, index)


def run_campaign(campaign: CampaignConfig, workers: int | None = None) -> CampaignResult:
    """Run all pulses; identical results for any worker count."""
    indices = range(campaign.n_pulses)
    if workers is None or workers <= 1:
        outcomes = [run_pulse(campaign, i) for i in indices]
    else:
        chunk = max(1, campaign.n_pulses // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                pool.map(
                    _pulse_task,
                    [(campaign, i) for i in indices],
                    chunksize=chunk,
                )
            )
        outcomes.sort(key=lambda o: o.pulse_index)
    return CampaignResult(outcomes=tuple(outcomes), summary=summarize(outcomes))


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a parameter sweep."""

    x: float
    mean_ions: float
    sem_ions: float
    total_direct_ions: int
    n_pulses: int


def _power_sweep_pulse(
    campaign: CampaignConfig, pulse_index: int, powers: list[float]
) -> list[PulseOutcome]:
    """One pulse evaluated at every power of a sweep grid.

    The per-pulse random draws (yield, atoms, trap uniforms, direct ions)
    do not involve the second-step power, and the expensive excited
    fraction involves only the first step, so one pulse can serve a whole
    power grid. The outcomes are bit-identical to running run_pulse with
    the power substituted point by point.
    """
    seq = np.random.SeedSequence(campaign.master_seed, spawn_key=(pulse_index,))
    rng = np.random.Generator(np.random.PCG64(seq))
    seed_path = f"{campaign.master_seed}:{pulse_index}"
    scheme = campaign.scheme

    _, n_atoms = neutral_yield(campaign.plume, campaign.fluence_j_cm2, rng)
    batch = None
    core = None
    uniforms = None
    if n_atoms > 0:
        cat = campaign.catalog
        masses = np.array([i.mass_number for i in cat.isotopes])
        abund = np.array([i.abundance for i in cat.isotopes])
        batch = sample_atoms(campaign.plume, n_atoms, masses, abund, rng)
        core = chord_core(scheme, cat, batch)
        uniforms = rng.random(n_atoms)
    mean_direct = direct_ion_yield(campaign.plume, campaign.fluence_j_cm2)
    direct = int(rng.poisson(mean_direct)) if mean_direct > 0.0 else 0

    decay_rate = 2.0 * math.pi * scheme.first_step.transition.linewidth_hz
    outcomes = []
    for power in powers:
        trapped: dict[int, int] = {}
        fluorescence = 0.0
        if n_atoms > 0:
            rates = rates_from_core(scheme, core, power_w=power)
            gate = capture_gate(
                power, scheme.capture_threshold_w, scheme.capture_threshold_exponent
            )
            p_trap = scheme.capture_efficiency * gate * -np.expm1(-rates.a_exp)
            hits = np.flatnonzero(uniforms < p_trap)
            if hits.size:
                order = hits[np.argsort(batch.arrival_time_s[hits], kind="stable")]
                kept = order[: scheme.trap_capacity]
                for mass in batch.mass_number[kept]:
                    m = int(mass)
                    trapped[m] = trapped.get(m, 0) + 1
            fluorescence = float(
                campaign.fluorescence_collection
                * decay_rate
                * rates.excited_dose_s.sum()
            )
        outcomes.append(
            PulseOutcome(
                pulse_index=pulse_index,
                n_atoms=n_atoms,
                trapped_by_isotope=trapped,
                direct_ions=direct,
                neutral_fluorescence_counts=fluorescence,
                seed_path=seed_path,
            )
        )
    return outcomes


def _power_sweep_task(
    args: tuple[CampaignConfig, int, list[float]]
) -> list[PulseOutcome]:
    campaign, index, powers = args
    return _power_sweep_pulse(campaign, index, powers)


def _summary_point(x: float, outcomes: list[PulseOutcome]) -> SweepPoint:
    s = summarize(outcomes)
    return SweepPoint(
        x=x,
        mean_ions=s.mean_ions,
        sem_ions=s.sem_ions,
        total_direct_ions=s.total_direct_ions,
        n_pulses=s.n_pulses,
    )


def sweep(
    campaign: CampaignConfig,
    variable: str,
    grid,
    workers: int | None = None,
) -> list[SweepPoint]:
    """One campaign per grid point, all sharing the template's seed.

    variable selects what the grid controls: "second_step_power" (W) or
    "fluence" (J/cm^2). Matched seeds keep point-to-point scatter
    correlated so the curve shape is driven by the physics.
    """
    grid = list(float(g) for g in grid)
    if not grid:
        raise ValueError("empty sweep grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be strictly ascending")

    if variable == "second_step_power":
        # Power touches nothing random, so each pulse is shared across
        # the whole grid and the chord integrals are computed only once.
        per_point: list[list[PulseOutcome]] = [[] for _ in grid]
        indices = range(campaign.n_pulses)
        if workers is None or workers <= 1:
            for i in indices:
                for slot, outcome in zip(per_point, _power_sweep_pulse(campaign, i, grid)):
                    slot.append(outcome)
        else:
            chunk = max(1, campaign.n_pulses // (workers * 4))
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for by_power in pool.map(
                    _power_sweep_task,
                    [(campaign, i, grid) for i in indices],
                    chunksize=chunk,
                ):
                    for slot, outcome in zip(per_point, by_power):
                        slot.append(outcome)
        return [_summary_point(x, outs) for x, outs in zip(grid, per_point)]

    if variable != "fluence":
        raise ValueError(f"unknown sweep variable: {variable!r}")
    points = []
    for x in grid:
        c = replace(campaign, fluence_j_cm2=x)
        result = run_campaign(c, workers=workers)
        points.append(_summary_point(x, result.outcomes))
    return points
