"""Classical signal-processing arithmetic of the experiment's control chain.

Covers the bias-tee droop compensation applied to flux pulses, extraction of
the bias-tee time constant from a frequency-vs-time trace, and projection of
complex readout points onto the ground/excited reference axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize
from scipy.integrate import cumulative_trapezoid

DEFAULT_TAU_NS = 718.0


class FitError(RuntimeError):
    """Least-squares fit failed to converge or the data are degenerate."""


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled real waveform; ``unit`` documents the sample values."""

    sample_period: float
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if not self.sample_period > 0:
            raise ValueError(f"sample period must be positive, got {self.sample_period}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("waveform contains non-finite samples")

    @property
    def times(self) -> np.ndarray:
        return self.sample_period * np.arange(len(self.values))


def biastee_predistort(current: Waveform, tau: float, resistance: float) -> Waveform:
    """Voltage pulse compensating the bias tee's exponential droop.

    V(t) = R * (I(t) + (1/tau) * integral_0^t I dt'), with the integral taken
    by the trapezoidal rule on the sample grid (so V(0) = R*I(0)).
    """
    if not tau > 0:
        raise ValueError(f"time constant must be positive, got {tau}")
    integral = cumulative_trapezoid(current.values, dx=current.sample_period, initial=0.0)
    volts = resistance * (current.values + integral / tau)
    return Waveform(current.sample_period, volts, unit="mV" if current.unit == "mA" else "")


def biastee_highpass(voltage: Waveform, tau: float) -> Waveform:
    """First-order high-pass response of the bias tee itself.

    Forward model dV_out = dV_in - V_out * dt / tau; applying it to a
    predistorted pulse should recover the designed R*I(t).
    """
    if not tau > 0:
        raise ValueError(f"time constant must be positive, got {tau}")
    v_in = voltage.values
    out = np.empty_like(v_in)
    out[0] = v_in[0]
    dt = voltage.sample_period
    for i in range(1, len(v_in)):
        out[i] = out[i - 1] + (v_in[i] - v_in[i - 1]) - out[i - 1] * dt / tau
    return Waveform(voltage.sample_period, out, unit=voltage.unit)


def biastee_fit_tau(times, frequencies) -> tuple[float, float]:
    """Fit omega(t) = A*exp(-t/tau) + C and return (tau, standard error).

    The initial guess comes from log-linearizing the decaying segment; the
    returned uncertainty is the 1-sigma error of the nonlinear fit.
    """
    t = np.asarray(times, dtype=float)
    w = np.asarray(frequencies, dtype=float)
    if len(t) < 10:
        raise FitError(f"need at least 10 samples to fit a decay, got {len(t)}")
    span = float(np.ptp(w))
    if span <= 1e-12 * max(1.0, abs(float(np.mean(w)))):
        raise FitError("trace is constant; no decay to fit")

    tail = max(1, len(w) // 10)
    c0 = float(np.mean(w[-tail:]))
    a0 = float(w[0] - c0)
    if abs(a0) <= 1e-12 * span:
        raise FitError("no initial transient relative to the asymptote")
    rel = (w - c0) / a0
    usable = np.nonzero((rel > 0.05) & (rel <= 1.0))[0]
    if len(usable) >= 3:
        slope = np.polyfit(t[usable], np.log(rel[usable]), 1)[0]
        tau0 = -1.0 / slope if slope < 0 else float(t[-1] - t[0])
    else:
        tau0 = float(t[-1] - t[0])

    def model(tt, a, tau, c):
        return a * np.exp(-tt / tau) + c

    try:
        params, cov = scipy.optimize.curve_fit(
            model, t, w, p0=(a0, abs(tau0), c0), maxfev=20000
        )
    except RuntimeError as exc:
        raise FitError(f"exponential fit did not converge: {exc}") from exc
    tau = float(params[1])
    tau_err = float(np.sqrt(cov[1, 1])) if np.all(np.isfinite(cov)) else float("inf")
    return tau, tau_err


def iq_project(points, ref_g: complex, ref_e: complex) -> np.ndarray:
    """Project IQ-plane points onto the line through the state references.

    P = Re[(z - z_g) * conj(z_e - z_g)] / |z_e - z_g|^2, so the ground
    reference maps to 0 and the excited one to 1.  Values are returned
    unclamped; see clamp_population for the bounded view.
    """
    axis = complex(ref_e) - complex(ref_g)
    if axis == 0:
        raise ValueError("ground and excited references coincide")
    z = np.asarray(points, dtype=complex)
    return ((z - complex(ref_g)) * np.conj(axis)).real / abs(axis) ** 2


def clamp_population(values) -> np.ndarray:
    """Clip projected populations to the physical interval [0, 1]."""
    return np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
