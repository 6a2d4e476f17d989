"""Real-to-complex 3D FFT backend, selected once at import time.

torch's CPU FFT is noticeably faster than pocketfft at the resolutions this
package targets (32-64 per axis), so it is preferred when importable.  scipy
is the always-available fallback and the declared dependency.  Set
NSVLAB_FFT=scipy to force the fallback (used by the benchmark suite).

Both backends compute the identical transform in float64; results differ
only at rounding level.
"""

import os

import numpy as np

BACKEND = "scipy"

if os.environ.get("NSVLAB_FFT", "").lower() != "scipy":
    try:
        import torch as _torch

        BACKEND = "torch"
    except ImportError:
        pass

if BACKEND == "torch":

    def rfftn(a: np.ndarray) -> np.ndarray:
        return _torch.fft.rfftn(_torch.from_numpy(a)).numpy()

    def irfftn(a: np.ndarray, shape) -> np.ndarray:
        return _torch.fft.irfftn(_torch.from_numpy(a), s=shape).numpy()

else:
    import scipy.fft as _sfft

    def rfftn(a: np.ndarray) -> np.ndarray:
        return _sfft.rfftn(a)

    def irfftn(a: np.ndarray, shape) -> np.ndarray:
        return _sfft.irfftn(a, s=shape)
