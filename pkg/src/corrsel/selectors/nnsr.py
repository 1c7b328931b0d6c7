from __future__ import annotations

import time

import numpy as np

from ..exceptions import MissingQuality, NoSeparation
from ..geometry import otsu_threshold
from ..model import CorrespondenceSet, SelectionResult
from ..params import NnsrParams


def select_nnsr(cs: CorrespondenceSet, params: NnsrParams | None = None, seed: int = 0) -> SelectionResult:
    """Keep matches whose distance ratio is at most the threshold.

    With ``t_nnsr=None`` the threshold is the Otsu split of all ratios.  When
    the ratios cannot be split (all equal) every match is kept and the result
    carries the ``no-separation`` flag.
    """
    params = params or NnsrParams()
    start = time.perf_counter()
    if len(cs) == 0:
        return SelectionResult([], np.zeros(0), method="nnsr", runtime=time.perf_counter() - start)
    if not cs.has_quality:
        raise MissingQuality("NNSR needs a quality (ratio) value on every correspondence")
    quality = cs.quality
    flags = []
    threshold = params.t_nnsr
    if threshold is None:
        try:
            threshold = otsu_threshold(quality)
        except NoSeparation:
            threshold = np.inf
            flags.append("no-separation")
    selected = np.flatnonzero(quality <= threshold)
    return SelectionResult(selected, 1.0 - quality, iterations_used=1, flags=tuple(flags),
                           method="nnsr", runtime=time.perf_counter() - start)
