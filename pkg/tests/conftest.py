from __future__ import annotations

import datetime as dt

import pytest
from hypothesis import settings

from pvmeta.data import CloudModel, Location, SyntheticScenario, synthesize
from pvmeta.fitscore import FitObjective
from pvmeta.preprocess import preprocess
from pvmeta.solar_model import PanelParams, SurfaceOrientation

settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")

CHINO = Location(34.0122, -117.6889)
TRUTH = (270.0, 18.0)


def make_scenario(azimuth=TRUTH[0], tilt=TRUTH[1], start=dt.date(2016, 1, 1),
                  end=dt.date(2016, 12, 31), **kwargs) -> SyntheticScenario:
    kwargs.setdefault("location", CHINO)
    return SyntheticScenario(SurfaceOrientation(azimuth, tilt), PanelParams(5000.0),
                             start=start, end=end, **kwargs)


class Pipeline:
    """Synthesized data plus everything derived from it."""

    def __init__(self, scenario: SyntheticScenario, scheme: str = "month"):
        self.scenario = scenario
        self.irradiance, self.profile = synthesize(scenario)
        self.pre = preprocess(self.profile, self.irradiance, scheme=scheme)
        self.groups = self.pre.groups
        self.objective = FitObjective(self.groups, self.irradiance)


@pytest.fixture(scope="session")
def noiseless_year() -> Pipeline:
    return Pipeline(make_scenario())


@pytest.fixture(scope="session")
def noisy_year() -> Pipeline:
    return Pipeline(make_scenario(noise_std=0.05, rng_seed=1))


@pytest.fixture(scope="session")
def cloudy_month() -> Pipeline:
    """July 2016 with every day overcast except the 14th."""
    days = [dt.date(2016, 7, d) for d in range(1, 32) if d != 14]
    return Pipeline(make_scenario(start=dt.date(2016, 7, 1), end=dt.date(2016, 7, 31),
                                  cloud_model=CloudModel("overcast", dates=tuple(days))))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
