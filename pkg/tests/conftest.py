"""Shared fixtures: default configuration, reference designs and short cycles."""
from __future__ import annotations

import sys

import numpy as np
import pytest

from evtransmission.config import Config, RatioSet
from evtransmission.cycles import DriveCycle, synthetic_cycle
from evtransmission.lossmap import GearboxLossModel, build_loss_maps
from evtransmission.synthesis import synthesize

FGT_KEY = RatioSet(55, 38)  # published gradeability-constrained fixed-gear optimum
TGT_KEY = RatioSet(48, 44, teeth_g2=20)  # published two-gear optimum


@pytest.fixture(scope="session")
def cfg() -> Config:
    return Config()


@pytest.fixture(scope="session")
def fgt(cfg):
    return synthesize(FGT_KEY, cfg)


@pytest.fixture(scope="session")
def tgt(cfg):
    return synthesize(TGT_KEY, cfg)


@pytest.fixture(scope="session")
def tgt_model(tgt, cfg):
    return GearboxLossModel(tgt, cfg)


@pytest.fixture(scope="session")
def short_cycle() -> DriveCycle:
    return synthetic_cycle(200, seed=3)


@pytest.fixture(scope="session")
def fgt_maps(fgt, cfg):
    return build_loss_maps(fgt, cfg, (60, 60))


@pytest.fixture(scope="session")
def tgt_maps(tgt, cfg):
    return build_loss_maps(tgt, cfg, (60, 60))


@pytest.fixture
def rng():
    return np.random.default_rng(20221)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
