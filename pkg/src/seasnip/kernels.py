"""Hot numeric kernels with numba JIT and a pure-NumPy fallback.

Two inner loops dominate runtime across the pipeline: superposing a few
hundred cosine components into a long elevation record, and the fixed-step
RK4 integration of the two-degree-of-freedom motion model. Both ship in two
variants:

* a numba ``@njit`` compiled loop (default when numba imports cleanly), and
* a pure-NumPy implementation used when numba is unavailable or when the
  environment variable ``SEASNIP_NUMBA`` is set to ``0``/``false``/``no``.

``benchmarks/bench_kernels.py`` times the two paths against each other.
The flag is read once at import time.
"""

import os

import numpy as np


def _numba_requested() -> bool:
    flag = os.environ.get("SEASNIP_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

NUMBA_ENABLED = _HAVE_NUMBA and _numba_requested()


# ---------------------------------------------------------------------------
# wave superposition


def _synthesize_elevation_loop(amplitudes, frequencies, phases, n_samples, dt, t0):
    out = np.empty(n_samples)
    n_comp = amplitudes.shape[0]
    for j in range(n_samples):
        t = t0 + j * dt
        acc = 0.0
        for i in range(n_comp):
            acc += amplitudes[i] * np.cos(frequencies[i] * t + phases[i])
        out[j] = acc
    return out


def synthesize_elevation_numpy(
    amplitudes, frequencies, phases, n_samples, dt, t0=0.0, chunk=8192
):
    """Chunked outer-product evaluation of sum_i a_i cos(w_i t + p_i).

    Chunking bounds the (samples x components) temporary for long records.
    """
    out = np.empty(n_samples)
    for start in range(0, n_samples, chunk):
        stop = min(start + chunk, n_samples)
        t = t0 + dt * np.arange(start, stop, dtype=np.float64)
        out[start:stop] = np.cos(np.outer(t, frequencies) + phases) @ amplitudes
    return out


# ---------------------------------------------------------------------------
# 2-DOF (heave, pitch) forced-oscillator integration

# State is (z, vz, theta, vtheta) in meters/radians. Forcing arrays are the
# already-scaled dimensionless inputs per DOF; the RK4 half step uses the
# midpoint average of adjacent forcing samples.


def _integrate_motion_loop(
    f_heave,
    f_pitch,
    dt,
    omega_z,
    zeta_z,
    quad_z,
    cubic_z,
    omega_th,
    zeta_th,
    quad_th,
    cubic_th,
    stiffness_floor,
    coupling,
    draft,
    heave_limit,
    pitch_limit,
):
    n = f_heave.shape[0]
    heave = np.zeros(n)
    pitch = np.zeros(n)

    wz2 = omega_z * omega_z
    wth2 = omega_th * omega_th

    # A softening cubic (c < 0) loses restoring stiffness with amplitude;
    # past the knee where the tangent stiffness would drop below the floor,
    # continue linearly at the floor slope so responses stay bounded.
    big = 1.0e30
    knee_z = np.sqrt((1.0 - stiffness_floor) / (-3.0 * cubic_z)) if cubic_z < 0.0 else big
    knee_th = np.sqrt((1.0 - stiffness_floor) / (-3.0 * cubic_th)) if cubic_th < 0.0 else big

    def restoring(x, cubic, knee):
        ax = abs(x)
        if ax <= knee:
            return x + cubic * x * x * x
        edge = knee + cubic * knee * knee * knee
        r = edge + stiffness_floor * (ax - knee)
        return r if x >= 0.0 else -r

    def accel(z, vz, th, vth, fz, fth):
        az = (
            -2.0 * zeta_z * omega_z * vz
            - quad_z * vz * abs(vz)
            - wz2 * restoring(z, cubic_z, knee_z)
            - wz2 * coupling * th * draft
            + wz2 * fz
        )
        ath = (
            -2.0 * zeta_th * omega_th * vth
            - quad_th * vth * abs(vth)
            - wth2 * restoring(th, cubic_th, knee_th)
            - wth2 * coupling * z / draft
            + wth2 * fth
        )
        return az, ath

    z = 0.0
    vz = 0.0
    th = 0.0
    vth = 0.0
    half = 0.5 * dt
    sixth = dt / 6.0

    for j in range(n - 1):
        fz0 = f_heave[j]
        fth0 = f_pitch[j]
        fz1 = f_heave[j + 1]
        fth1 = f_pitch[j + 1]
        fzh = 0.5 * (fz0 + fz1)
        fthh = 0.5 * (fth0 + fth1)

        az1, ath1 = accel(z, vz, th, vth, fz0, fth0)
        k1z, k1vz, k1th, k1vth = vz, az1, vth, ath1

        az2, ath2 = accel(
            z + half * k1z, vz + half * k1vz, th + half * k1th, vth + half * k1vth,
            fzh, fthh,
        )
        k2z, k2vz, k2th, k2vth = vz + half * k1vz, az2, vth + half * k1vth, ath2

        az3, ath3 = accel(
            z + half * k2z, vz + half * k2vz, th + half * k2th, vth + half * k2vth,
            fzh, fthh,
        )
        k3z, k3vz, k3th, k3vth = vz + half * k2vz, az3, vth + half * k2vth, ath3

        az4, ath4 = accel(
            z + dt * k3z, vz + dt * k3vz, th + dt * k3th, vth + dt * k3vth,
            fz1, fth1,
        )
        k4z, k4vz, k4th, k4vth = vz + dt * k3vz, az4, vth + dt * k3vth, ath4

        z = z + sixth * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        vz = vz + sixth * (k1vz + 2.0 * k2vz + 2.0 * k3vz + k4vz)
        th = th + sixth * (k1th + 2.0 * k2th + 2.0 * k3th + k4th)
        vth = vth + sixth * (k1vth + 2.0 * k2vth + 2.0 * k3vth + k4vth)

        bad = not (
            np.isfinite(z)
            and np.isfinite(vz)
            and np.isfinite(th)
            and np.isfinite(vth)
        )
        if bad or abs(z) > heave_limit or abs(th) > pitch_limit:
            return heave, pitch, j + 1

        heave[j + 1] = z
        pitch[j + 1] = th

    return heave, pitch, -1


if NUMBA_ENABLED:
    synthesize_elevation_jit = njit(cache=True)(_synthesize_elevation_loop)
    integrate_motion_jit = njit(cache=True)(_integrate_motion_loop)
    synthesize_elevation = synthesize_elevation_jit
    integrate_motion = integrate_motion_jit
else:  # pragma: no cover - depends on environment flag
    synthesize_elevation_jit = None
    integrate_motion_jit = None
    synthesize_elevation = synthesize_elevation_numpy
    integrate_motion = _integrate_motion_loop

integrate_motion_numpy = _integrate_motion_loop
