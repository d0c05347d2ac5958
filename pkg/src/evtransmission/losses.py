"""Forward loss models of the individual transmission components.

Every function is a pure numpy expression that broadcasts over its speed and
torque arguments, so a whole loss-map grid can be evaluated in one call.

Units are SI throughout except inside the two empirical fits that are
defined in their native units:

* the EHL sliding-friction regression (GPa, m/s, cP, m, um), and
* the SKF bearing frictional-moment model (mm, mm^2/s, N mm), whose moments
  are converted to N m before they leave :func:`bearing_losses`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import AirProps, BearingParams, ChurnCoeffs, GearboxConfig, OilProps
from .synthesis import GearPairGeometry


# ---------------------------------------------------------------- lubricant

def oil_viscosity(temperature: float, oil: OilProps) -> tuple[float, float]:
    """Walther-law viscosity at ``temperature`` degC: ``(dynamic Pa s, kinematic m^2/s)``."""
    lo, hi = oil.temperature_range
    if not lo <= temperature <= hi:
        raise ValueError(f"oil temperature {temperature} degC outside Walther fit range [{lo}, {hi}]")
    log_log = oil.walther_a - oil.walther_b * math.log10(temperature + 273.15)
    nu_cst = 10.0 ** (10.0 ** log_log) - 0.7
    if not nu_cst > 0:
        raise ValueError("Walther constants give a non-positive viscosity")
    kinematic = nu_cst * 1e-6
    return kinematic * oil.density, kinematic


@dataclass(frozen=True)
class Fluid:
    """Properties that the churning model needs from oil or air."""

    viscosity: float  # dynamic, Pa s
    density: float
    laminar: ChurnCoeffs
    turbulent: ChurnCoeffs
    temperature: float  # degC, multiplies the face term
    reynolds_threshold: float = 2000.0


def oil_fluid(oil: OilProps) -> Fluid:
    mu, _ = oil_viscosity(oil.temperature, oil)
    return Fluid(mu, oil.density, oil.churn_laminar, oil.churn_turbulent, oil.temperature,
                 oil.reynolds_threshold)


def air_fluid(air: AirProps, oil: OilProps) -> Fluid:
    return Fluid(air.dynamic_viscosity, air.density, air.churn_laminar, air.churn_turbulent,
                 oil.temperature, oil.reynolds_threshold)


# ---------------------------------------------------------------- gear mesh

def effective_modulus(gb: GearboxConfig) -> float:
    """Plane-strain modulus of two identical steel bodies."""
    return gb.youngs_modulus / (1.0 - gb.poisson_ratio**2)


@dataclass(frozen=True, eq=False)
class MeshGeometry:
    """Involute contact kinematics of one pair, sampled along the path of contact.

    Positions are midpoints of equal sub-intervals of the approach-double,
    single and recess-double contact zones, so the piecewise load-sharing
    factor never straddles a sample cell. ``weights`` sum to one and turn a
    per-position quantity into its mesh-cycle average.
    """

    pair: GearPairGeometry
    base_radius: float  # pinion
    helix_angle: float
    e_prime: float
    position: np.ndarray  # m from the pitch point, positive towards the pinion tip
    weights: np.ndarray
    share: np.ndarray  # fraction of the normal load carried by the sampled tooth pair
    radius_pinion: np.ndarray  # profile radii of curvature
    radius_gear: np.ndarray
    curvature: np.ndarray  # effective radius R
    slide_roll: np.ndarray  # S, speed independent
    entrainment_per_speed: np.ndarray  # v_e / pinion speed

    @property
    def mean_entrainment_per_speed(self) -> float:
        return float(np.sum(self.weights * self.entrainment_per_speed))


def load_share(x, path_length: float, base_pitch: float):
    """Trapezoidal share of the normal load carried by one tooth pair at ``x`` in [0, L]."""
    x = np.asarray(x, dtype=float)
    eps = path_length / base_pitch
    if eps <= 1.0:
        return np.ones_like(x)
    start, end = path_length - base_pitch, base_pitch  # single-contact band
    if start >= end:  # contact ratio >= 2: always shared
        return np.full_like(x, 0.5)
    up = 1.0 / 3.0 + (x / start) / 3.0
    down = 2.0 / 3.0 - ((x - end) / (path_length - end)) / 3.0
    return np.where(x < start, up, np.where(x <= end, 1.0, down))


@lru_cache(maxsize=4096)
def mesh_geometry(pair: GearPairGeometry, gb: GearboxConfig, n_points: int | None = None) -> MeshGeometry:
    n = gb.mesh_points if n_points is None else n_points
    if n < 3:
        raise ValueError("need at least 3 mesh-cycle samples")
    alpha = gb.pressure_angle
    r1, r2 = pair.pinion_radius, pair.gear_radius
    module = 2.0 * r1 / gb.teeth_per_pinion
    rb1, rb2 = r1 * math.cos(alpha), r2 * math.cos(alpha)
    ra1, ra2 = r1 + module, r2 + module
    recess = math.sqrt(ra1**2 - rb1**2) - r1 * math.sin(alpha)
    approach = math.sqrt(ra2**2 - rb2**2) - r2 * math.sin(alpha)
    # contact below the pinion base circle is undercut, never loaded
    approach = min(approach, 0.9 * r1 * math.sin(alpha))
    recess = min(recess, 0.9 * r2 * math.sin(alpha))
    length = approach + recess
    p_base = 2.0 * math.pi * rb1 / gb.teeth_per_pinion

    if length > p_base and length < 2 * p_base:
        edges = [0.0, length - p_base, p_base, length]
    else:
        edges = [0.0, length]
    spans = np.diff(edges)
    counts = np.maximum(1, np.round(n * spans / length).astype(int))
    counts[np.argmax(spans)] += n - counts.sum()
    xs, ws = [], []
    for lo, span, k in zip(edges[:-1], spans, counts):
        xs.append(lo + (np.arange(k) + 0.5) * span / k)
        ws.append(np.full(k, span / k / length))
    x = np.concatenate(xs)
    w = np.concatenate(ws)

    s = x - approach
    rho1 = r1 * math.sin(alpha) + s
    rho2 = r2 * math.sin(alpha) - s
    u1 = rho1  # surface velocities per unit pinion speed
    u2 = rho2 / pair.ratio
    ve = 0.5 * (u1 + u2)
    return MeshGeometry(
        pair=pair, base_radius=rb1, helix_angle=gb.helix_angle, e_prime=effective_modulus(gb),
        position=s, weights=w, share=load_share(x, length, p_base),
        radius_pinion=rho1, radius_gear=rho2, curvature=rho1 * rho2 / (rho1 + rho2),
        slide_roll=(u1 - u2) / ve, entrainment_per_speed=ve,
    )


@dataclass(frozen=True, eq=False)
class MeshState:
    """Contact quantities of a loaded, rotating mesh; the last axis runs along the
    mesh cycle, leading axes follow the broadcast of speed and torque."""

    omega: np.ndarray
    torque: np.ndarray
    load: np.ndarray  # W, N
    pressure: np.ndarray  # p_h, Pa
    slide_roll: np.ndarray  # S
    entrainment: np.ndarray  # v_e, m/s
    curvature: np.ndarray  # R, m
    width: float
    weights: np.ndarray
    e_prime: float

    def average(self, values) -> np.ndarray:
        return np.sum(values * self.weights, axis=-1)


def normal_load(geom: MeshGeometry, torque):
    """Total normal tooth force (N) for a pinion torque."""
    return np.abs(np.asarray(torque, dtype=float)) / (geom.base_radius * math.cos(geom.helix_angle))


def hertz_pressure(load, curvature, width: float, e_prime: float):
    """Peak line-contact pressure (Pa)."""
    return np.sqrt(np.asarray(load) * e_prime / (2.0 * math.pi * curvature * width))


def mesh_state(geom: MeshGeometry, omega, torque) -> MeshState:
    omega = np.asarray(omega, dtype=float)
    torque = np.asarray(torque, dtype=float)
    w = normal_load(geom, torque)[..., None] * geom.share
    ph = hertz_pressure(w, geom.curvature, geom.pair.width, geom.e_prime)
    ve = np.abs(omega)[..., None] * geom.entrainment_per_speed
    shape = np.broadcast_shapes(w.shape, ve.shape)
    return MeshState(
        omega=omega, torque=torque, load=np.broadcast_to(w, shape), pressure=np.broadcast_to(ph, shape),
        slide_roll=np.broadcast_to(geom.slide_roll, shape), entrainment=np.broadcast_to(ve, shape),
        curvature=np.broadcast_to(geom.curvature, shape), width=geom.pair.width, weights=geom.weights,
        e_prime=geom.e_prime,
    )


def sliding_coefficient(p_h, slide_roll, v_e, viscosity, curvature, roughness, coeffs):
    """EHL sliding-friction coefficient.

    Native units: ``p_h`` GPa, ``v_e`` m/s, ``viscosity`` cP (dynamic),
    ``curvature`` m, ``roughness`` um. The logarithm is decadic.
    """
    b1, b2, b3, b4, b5, b6, b7, b8, b9 = coeffs
    if not viscosity > 0:
        raise ValueError("viscosity must be positive")
    p_h = np.asarray(p_h, dtype=float)
    s_abs = np.abs(slide_roll)
    arg = s_abs * p_h * math.log10(viscosity)
    f = b1 + b4 * arg + b5 * np.exp(-arg) + b9 * math.exp(roughness)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (np.exp(f) * p_h**b2 * s_abs**b3 * np.asarray(v_e, float) ** b6
                * viscosity**b7 * np.asarray(curvature, float) ** b8)


def _viscosity_cp(oil: OilProps) -> float:
    return oil_viscosity(oil.temperature, oil)[0] * 1e3


def gear_sliding_force(state: MeshState, oil: OilProps, roughness: float = 0.5e-6):
    """Mesh-cycle average of ``mu W`` (N). Zero where the mesh is unloaded or stationary."""
    mu = sliding_coefficient(state.pressure * 1e-9, state.slide_roll, state.entrainment, _viscosity_cp(oil),
                             state.curvature, roughness * 1e6, oil.ehl_coeffs)
    moving = (state.entrainment > 0) & (state.load > 0)
    return state.average(np.where(moving, mu * state.load, 0.0))


def rolling_force_density(load, entrainment, curvature, width, e_prime, viscosity, pressure_coeff):
    """EHL rolling (pressure) force per unit face width, N/m."""
    if not pressure_coeff > 0:
        raise ValueError("pressure-viscosity coefficient must be positive")
    g = pressure_coeff * e_prime
    u = viscosity * np.asarray(entrainment, float) / (e_prime * curvature)
    q = np.asarray(load, float) / (e_prime * curvature * width)
    return 4.318 * (g * u) ** 0.658 * q**0.0126 * curvature / pressure_coeff


def gear_rolling_force(state: MeshState, oil: OilProps):
    """Mesh-cycle average rolling friction force (N) over the face width."""
    mu, _ = oil_viscosity(oil.temperature, oil)
    f = rolling_force_density(state.load, state.entrainment, state.curvature, state.width, state.e_prime,
                              mu, oil.pressure_viscosity_coeff)
    return state.average(f * state.width)


def mesh_force_profile(geom: MeshGeometry, torque, oil: OilProps, roughness: float = 0.5e-6):
    """Torque-only factors ``(F_sl, F_r)`` of the mesh forces at unit pinion speed.

    The sliding force scales as ``omega**b6`` and the rolling force as
    ``omega**0.658``; :func:`mesh_power` combines them with the speed axis.
    Only distinct torque magnitudes are evaluated.
    """
    mag = np.abs(np.asarray(torque, dtype=float))
    uniq, inverse = np.unique(mag, return_inverse=True)
    unit = mesh_state(geom, 1.0, uniq)
    f_sl = gear_sliding_force(unit, oil, roughness)
    f_r = gear_rolling_force(unit, oil)
    return f_sl[inverse].reshape(mag.shape), f_r[inverse].reshape(mag.shape)


def mesh_power(geom: MeshGeometry, omega, torque, oil: OilProps, roughness: float = 0.5e-6, profile=None):
    """Friction power ``(F_sl + F_r) v_e`` of a mesh, in W, with ``v_e`` the
    cycle-mean entrainment speed.

    Both forces are products of a speed power law and a torque-only profile,
    so the profile is evaluated once per torque (or passed in precomputed from
    :func:`mesh_force_profile`) and combined with the speed axis afterwards;
    for broadcast grids this is far cheaper than building the full
    :class:`MeshState`. Results agree with the state-based functions to
    rounding.
    """
    omega = np.abs(np.asarray(omega, dtype=float))
    f_sl, f_r = mesh_force_profile(geom, torque, oil, roughness) if profile is None else profile
    b6 = oil.ehl_coeffs[5]
    c = geom.mean_entrainment_per_speed
    return c * (f_sl * omega ** (1.0 + b6) + f_r * omega**1.658)


# ---------------------------------------------------------- churning & windage

def immersion_shape(h):
    """Face-term immersion factor; 0 when dry, pi when fully immersed."""
    if np.ndim(h) == 0:
        h = float(h)
        return math.pi / 2 - math.asin(1 - h) - (1 - h) * math.sqrt(max(h * (2 - h), 0.0))
    h = np.asarray(h, dtype=float)
    return math.pi / 2 - np.arcsin(1 - h) - (1 - h) * np.sqrt(np.clip(h * (2 - h), 0.0, None))


def _check_immersion(h):
    if np.ndim(h) == 0:
        h = float(h)
        if not 0.0 <= h <= 2.0:
            raise ValueError("immersion must lie in [0, 2]")
        return h
    h = np.asarray(h, dtype=float)
    if np.any((h < 0) | (h > 2)):
        raise ValueError("immersion must lie in [0, 2]")
    return h


def _wetted_angle(h):
    return math.acos(1 - h) if np.ndim(h) == 0 else np.arccos(1 - h)


def cavity_power(r_tip: float, r_root: float, omega, viscosity: float, immersion, n_teeth: int,
                 cavity_count=None, cavity_angle=None, d3: float = 1.0, d4: float = 1.0):
    """Tooth-cavity pumping power (W) between tip radius ``r_tip`` and root radius ``r_root``.

    By default the submerged cavity count follows the wetted arc and each
    cavity spans half an angular pitch.
    """
    h = _check_immersion(immersion)
    n_c = n_teeth * _wetted_angle(h) / math.pi if cavity_count is None else cavity_count * np.greater(h, 0)
    delta = math.pi / n_teeth if cavity_angle is None else cavity_angle
    geom = (r_tip - r_root) ** 2 * (r_tip + r_root) * (d3 / (r_tip * r_root) - d4)
    return n_c * viscosity * delta * np.asarray(omega, dtype=float) * max(geom, 0.0)


def churning_power(r_outer: float, r_inner: float, width: float, omega, fluid: Fluid, immersion,
                   n_teeth: int | None = None, cavity_count=None, cavity_angle=None,
                   d3: float = 1.0, d4: float = 1.0):
    """Peripheral, face and cavity churning powers (W) of a partly immersed body.

    ``immersion`` is the dipped depth over the outer radius (0 dry, 2 fully
    submerged). The cavity term applies to toothed bodies only (``n_teeth``);
    it uses the tip and root radii ``r_outer``/``r_inner``, see
    :func:`cavity_power`.
    """
    h = _check_immersion(immersion)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("speed must be nonnegative")
    mu = fluid.viscosity
    wetted = _wetted_angle(h)
    p_p = 4.0 * mu * width * r_outer**2 * omega**2 * wetted

    reynolds = fluid.density * omega * r_outer**2 / mu
    lam, turb = fluid.laminar, fluid.turbulent

    def face(c: ChurnCoeffs):
        return c.b10 * fluid.temperature * mu**c.b11 * omega**c.b12 * r_outer**c.b13

    shape = immersion_shape(h) * np.sin(wetted) ** (-lam.b14)
    shape_t = immersion_shape(h) * np.sin(wetted) ** (-turb.b14)
    p_f = np.where(reynolds < fluid.reynolds_threshold, face(lam) * shape, face(turb) * shape_t)

    if n_teeth is None:
        p_c = np.zeros(np.broadcast_shapes(np.shape(p_p), np.shape(h)))
    else:
        p_c = cavity_power(r_outer, r_inner, omega, mu, h, n_teeth, cavity_count, cavity_angle, d3, d4)
        p_c = p_c * np.ones_like(p_p)
    return p_p, p_f, p_c


def windage_power(r_outer: float, width: float, omega, air: Fluid, immersion=2.0):
    """Windage (W): peripheral plus face terms in air; ``immersion`` is the
    share of the body outside the oil, on the same 0..2 scale."""
    p_p, p_f, _ = churning_power(r_outer, 0.0, width, omega, air, immersion)
    return p_p + p_f


def shaft_churning(radius: float, length: float, omega, oil: Fluid, immersion):
    p_p, p_f, _ = churning_power(radius, 0.0, length, omega, oil, immersion)
    return p_p + p_f


def clutch_windage(r_outer: float, width: float, omega, air: Fluid):
    """Dry clutch: windage only, completely in air."""
    return windage_power(r_outer, width, omega, air, 2.0)


def immersion_depth(oil_level: float, bottom_height, r_outer: float):
    """Dimensionless immersion ``clamp((h - bottom)/r_o, 0, 2)``."""
    return np.clip((oil_level - np.asarray(bottom_height, float)) / r_outer, 0.0, 2.0)


# ------------------------------------------------------------------ bearings

def bearing_roll_coeff(load, bp: BearingParams, kinematic_viscosity: float):
    """sigma_b,r in N mm s^0.6 (SKF units, ``kinematic_viscosity`` in m^2/s)."""
    nu = kinematic_viscosity * 1e6
    g_r = bp.roll_factor * (bp.mean_diameter * 1e3) ** 1.96 * np.abs(np.asarray(load, float)) ** 0.54
    return bp.inlet_reduction * bp.starvation * g_r * (30.0 * nu / math.pi) ** 0.6


def bearing_drag_coeffs(bp: BearingParams, kinematic_viscosity: float) -> tuple[float, float]:
    """(sigma_b,drag, sigma-bar_b,drag) in SKF units (N mm with speed in rad/s)."""
    dm = bp.mean_diameter * 1e3
    nu = kinematic_viscosity * 1e6
    sigma = 360.0 * bp.drag_loss_factor * bp.element_constant * dm**5 / math.pi**2
    sigma_bar = (9.0347e-7 / math.pi**2 * dm**3 * bp.geometry_factor
                 * (dm**2 * bp.oil_level_factor / (math.pi * nu)) ** bp.drag_exponent)
    return sigma, sigma_bar


def bearing_losses(omega, load, bp: BearingParams, oil: OilProps):
    """Rolling, sliding and drag moments (N m) and total power (W) of one bearing.

    ``load`` is the radial bearing load in N. The drag moment (and with it its
    power) is zero below ``bp.drag_cutoff_speed`` where the fitted speed power
    law diverges.
    """
    omega = np.abs(np.asarray(omega, dtype=float))
    load = np.abs(np.asarray(load, dtype=float))
    _, nu = oil_viscosity(oil.temperature, oil)
    t_r = bearing_roll_coeff(load, bp, nu) * omega**0.6
    g_sl = bp.slide_factor * (bp.mean_diameter * 1e3) ** -0.145 * load ** (5.0 / 3.0)
    t_sl = g_sl * (bp.boundary_weight * bp.boundary_coeff + (1 - bp.boundary_weight) * bp.ehl_coeff)
    sigma, sigma_bar = bearing_drag_coeffs(bp, nu)
    running = omega >= bp.drag_cutoff_speed
    with np.errstate(divide="ignore"):
        t_drag = np.where(running, sigma * omega**2 + sigma_bar * np.where(running, omega, 1.0) ** bp.drag_exponent,
                          0.0)
    t_r, t_sl, t_drag = (np.asarray(t, float) * 1e-3 for t in (t_r, t_sl, t_drag))
    return t_r, t_sl, t_drag, (t_r + t_sl + t_drag) * omega


# -------------------------------------------------------------- synchronizer

def synchro_drag_coeff(cone_diameter: float, gap: float, flow_length: float, oil: OilProps) -> float:
    """sigma_syn in N m s (kinematic viscosity times density)."""
    if not gap > 0:
        raise ValueError("synchronizer gap must be positive")
    _, nu = oil_viscosity(oil.temperature, oil)
    return 0.25 * math.pi * nu * oil.density * flow_length / gap * cone_diameter**3


def synchro_drag(omega_syn, omega_gear, sigma: float):
    """Raw drag power ``sigma (w_syn - w_g) w_syn``; may be negative."""
    omega_syn = np.asarray(omega_syn, dtype=float)
    return sigma * (omega_syn - np.asarray(omega_gear, float)) * omega_syn
