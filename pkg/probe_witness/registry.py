import logging
from collections.abc import Callable, Mapping
from typing import Any

import numpy as np

from .errors import UsageError
from .interference import ProbeScenario
from .photon_realization import (
    DetectionChannel,
    ScatteringGeometry,
    cbs_geometry,
    cbs_scenario,
    young_scenario,
)
from .spin_realization import (
    QUARTER_TURN,
    anisotropic_triplet_scenario,
    effective_triplet_scenario,
    rotated_phi_scenario,
    singlet_scenario,
)

logger = logging.getLogger()

Builder = Callable[[Mapping[str, Any]], ProbeScenario]


def get_scenario(realization: str, params: Mapping[str, Any]) -> ProbeScenario:
    """
    Builds the scenario of a realization from its validated parameters.
    """
    realizations = _init_realizations_dict()
    try:
        builder, _ = realizations[realization]
    except KeyError:
        raise UsageError(f"unknown realization {realization!r}, expected one of {sorted(realizations)}") from None
    scenario = builder(params)
    logger.debug(f"Built scenario {scenario.name} for {realization} with {dict(params)}")
    return scenario


def realization_names() -> list[str]:
    return list(_init_realizations_dict())


def realization_descriptions() -> dict[str, str]:
    return {name: description for name, (_, description) in _init_realizations_dict().items()}


def _young(params: Mapping[str, Any]) -> ProbeScenario:
    k_in = np.asarray(params.get("k_in", [0.0, 0.0, 1.0]), dtype=float)
    k_out = np.asarray(params.get("k_out", [1.0, 0.0, 0.0]), dtype=float)
    direction = params.get("channel_direction")
    channel = DetectionChannel() if direction is None else DetectionChannel.linear(direction)
    geometry = ScatteringGeometry(
        k_in=k_in / np.linalg.norm(k_in),
        k_out=k_out / np.linalg.norm(k_out),
        n_axis=params.get("n_axis", [1.0, 0.0, 0.0]),
        r1=params.get("r1", [0.0, 0.0, 0.0]),
        r2=params.get("r2", [8.0, 0.0, 0.0]),
    )
    return young_scenario(geometry, params.get("probe_prep", "unpolarized"), channel)


def _cbs(params: Mapping[str, Any]) -> ProbeScenario:
    geometry = cbs_geometry(
        k_in=params.get("k_in", [0.0, 0.0, 1.0]),
        n_axis=params.get("n_axis", [1.0, 0.0, 0.0]),
        separation=params.get("separation", 8.0),
    )
    return cbs_scenario(params.get("channel", "singlet"), geometry)


def _init_realizations_dict() -> dict[str, tuple[Builder, str]]:
    """
    Initializes the realizations dictionary.
    The key is the realization name used in configs and the value is a tuple of the scenario
    builder and a description of what the scenario witnesses
    """
    return {
        "spin-singlet": (
            lambda p: singlet_scenario(p.get("gt", QUARTER_TURN)),
            "AB ring, unpolarized electron, no spin analysis: singlet witness W_- at 2gt = pi/2.",
        ),
        "spin-triplet-anisotropic": (
            lambda p: anisotropic_triplet_scenario(p.get("variant", "plus3half")),
            "AB ring with a stronger or reversed transverse coupling on impurity 2: triplet witness W_+.",
        ),
        "spin-triplet-effective": (
            lambda p: effective_triplet_scenario(p.get("gt", QUARTER_TURN)),
            "AB ring, electron polarized and analyzed along z: effective triplet witness, separable bound -1/4.",
        ),
        "spin-phi-rotated": (
            lambda p: rotated_phi_scenario(p.get("axis", "x"), p.get("gt", QUARTER_TURN)),
            "Effective triplet witness rotated onto x (detects Phi-) or y (detects Phi+).",
        ),
        "young": (
            _young,
            "Single photon scattering off either atom; perpendicular unanalyzed detection gives 2 W_-.",
        ),
        "cbs": (
            _cbs,
            "Coherent backscattering; linear channel along n gives W_+, along n x k gives W_-.",
        ),
    }
