#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

import numpy as np


def relative_error(measured, expected):
    return abs(measured - expected)/abs(expected)


def seeded(seed=6):
    return np.random.default_rng(seed)
