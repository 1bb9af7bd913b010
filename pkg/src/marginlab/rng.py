"""Named, independent random streams.

Every stream is addressed by a root seed plus a key path of small integers,
e.g. ``stream(seed, *trial_key(t, HYPO), batch)``. Streams with different paths are
statistically independent and do not depend on call order, so parallel
trials reproduce bit for bit regardless of scheduling.
"""

import numpy as np

# scopes keep per-trial and shared paths disjoint
TRIAL = 0
SHARED = 1

# purpose codes
LABELING = 1
HYPO = 2
SAMPLE = 3
SHARED_HYPO = 4
MISC = 9


def stream(seed, *key):
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def trial_key(trial, purpose):
    return (TRIAL, int(trial), purpose)


def shared_key(purpose):
    return (SHARED, purpose)
