"""
HLL and HLLD approximate Riemann solvers (normal frame, vectorized over faces)
"""

from typing import Dict, Optional

import numpy as np
from loguru import logger

from .models import BX, BY, BZ, ENG, MX, MY, MZ, PRS, RHO, VX, VY, VZ
from .physics import fast_speed, physical_flux, prim_to_cons

_DEGENERATE = 1e-12


def _davis_speeds(wl: np.ndarray, wr: np.ndarray, gamma: float):
    cfl = fast_speed(wl, gamma, 0)
    cfr = fast_speed(wr, gamma, 0)
    sl = np.minimum(wl[VX] - cfl, wr[VX] - cfr)
    sr = np.maximum(wl[VX] + cfl, wr[VX] + cfr)
    return sl, sr


def _hll_combine(ul, ur, fl, fr, sl, sr):
    slc = np.minimum(sl, 0.0)
    src = np.maximum(sr, 0.0)
    width = np.where(src - slc > 0, src - slc, 1.0)
    return (src * fl - slc * fr + slc * src * (ur - ul)) / width


def hll_flux(wl: np.ndarray, wr: np.ndarray, gamma: float) -> np.ndarray:
    """Two-wave HLL flux with Davis wave-speed estimates"""
    sl, sr = _davis_speeds(wl, wr, gamma)
    ul, ur = prim_to_cons(wl, gamma), prim_to_cons(wr, gamma)
    fl, fr = physical_flux(wl, gamma), physical_flux(wr, gamma)
    return _hll_combine(ul, ur, fl, fr, sl, sr)


def _star_state(w, u, s, sm, pt_star, bn):
    """Outer intermediate state behind the fast wave of speed s"""
    rho = w[RHO]
    rho_s = rho * (s - w[VX]) / (s - sm)
    den = rho * (s - w[VX]) * (s - sm) - bn * bn
    degenerate = np.abs(den) <= _DEGENERATE * (rho * (s - w[VX]) ** 2 + bn * bn + _DEGENERATE)
    safe = np.where(degenerate, 1.0, den)
    along = (sm - w[VX]) / safe
    scale = (rho * (s - w[VX]) ** 2 - bn * bn) / safe

    v_s = np.where(degenerate, w[VY], w[VY] - bn * w[BY] * along)
    w_s = np.where(degenerate, w[VZ], w[VZ] - bn * w[BZ] * along)
    by_s = np.where(degenerate, w[BY], w[BY] * scale)
    bz_s = np.where(degenerate, w[BZ], w[BZ] * scale)

    pt = w[PRS] + 0.5 * (bn * bn + w[BY] ** 2 + w[BZ] ** 2)
    vb = w[VX] * bn + w[VY] * w[BY] + w[VZ] * w[BZ]
    vb_s = sm * bn + v_s * by_s + w_s * bz_s
    e_s = ((s - w[VX]) * u[ENG] - pt * w[VX] + pt_star * sm + bn * (vb - vb_s)) / (s - sm)

    star = np.empty_like(u)
    star[RHO] = rho_s
    star[MX] = rho_s * sm
    star[MY] = rho_s * v_s
    star[MZ] = rho_s * w_s
    star[ENG] = e_s
    star[BX] = bn
    star[BY] = by_s
    star[BZ] = bz_s
    star[BZ + 1:] = u[BZ + 1:]
    return star


def hlld_fan(wl: np.ndarray, wr: np.ndarray, gamma: float) -> Dict[str, np.ndarray]:
    """Wave speeds and the six states of the HLLD fan; Bn is the left/right average"""
    wl = wl.copy()
    wr = wr.copy()
    bn = 0.5 * (wl[BX] + wr[BX])
    wl[BX] = bn
    wr[BX] = bn

    ul, ur = prim_to_cons(wl, gamma), prim_to_cons(wr, gamma)
    fl, fr = physical_flux(wl, gamma), physical_flux(wr, gamma)
    sl, sr = _davis_speeds(wl, wr, gamma)

    ptl = wl[PRS] + 0.5 * np.sum(wl[BX:BZ + 1] ** 2, axis=0)
    ptr = wr[PRS] + 0.5 * np.sum(wr[BX:BZ + 1] ** 2, axis=0)
    ml = wl[RHO] * (sl - wl[VX])
    mr = wr[RHO] * (sr - wr[VX])
    den = mr - ml
    safe = np.where(den != 0, den, 1.0)
    sm = (mr * wr[VX] - ml * wl[VX] - ptr + ptl) / safe
    pt_star = (mr * ptl - ml * ptr + ml * mr * (wr[VX] - wl[VX])) / safe

    star_l = _star_state(wl, ul, sl, sm, pt_star, bn)
    star_r = _star_state(wr, ur, sr, sm, pt_star, bn)

    sql = np.sqrt(np.abs(star_l[RHO]))
    sqr = np.sqrt(np.abs(star_r[RHO]))
    sq_sum = np.where(sql + sqr > 0, sql + sqr, 1.0)
    sgn = np.sign(bn)
    vl_s, vr_s = star_l[MY] / star_l[RHO], star_r[MY] / star_r[RHO]
    wl_s, wr_s = star_l[MZ] / star_l[RHO], star_r[MZ] / star_r[RHO]
    v_ss = (sql * vl_s + sqr * vr_s + (star_r[BY] - star_l[BY]) * sgn) / sq_sum
    w_ss = (sql * wl_s + sqr * wr_s + (star_r[BZ] - star_l[BZ]) * sgn) / sq_sum
    by_ss = (sql * star_r[BY] + sqr * star_l[BY] + sql * sqr * (vr_s - vl_s) * sgn) / sq_sum
    bz_ss = (sql * star_r[BZ] + sqr * star_l[BZ] + sql * sqr * (wr_s - wl_s) * sgn) / sq_sum
    vb_ss = sm * bn + v_ss * by_ss + w_ss * bz_ss
    vb_l = sm * bn + vl_s * star_l[BY] + wl_s * star_l[BZ]
    vb_r = sm * bn + vr_s * star_r[BY] + wr_s * star_r[BZ]

    def _double_star(star, sq, e_sign, vb_side):
        dd = star.copy()
        dd[MY] = star[RHO] * v_ss
        dd[MZ] = star[RHO] * w_ss
        dd[BY] = by_ss
        dd[BZ] = bz_ss
        dd[ENG] = star[ENG] + e_sign * sq * (vb_side - vb_ss) * sgn
        return dd

    return {
        "bn": bn, "sl": sl, "sr": sr, "sm": sm, "pt_star": pt_star,
        "sl_star": sm - np.abs(bn) / np.where(sql > 0, sql, 1.0),
        "sr_star": sm + np.abs(bn) / np.where(sqr > 0, sqr, 1.0),
        "ul": ul, "ur": ur, "fl": fl, "fr": fr,
        "ul_star": star_l, "ur_star": star_r,
        "ul_dstar": _double_star(star_l, sql, -1.0, vb_l),
        "ur_dstar": _double_star(star_r, sqr, +1.0, vb_r),
        "valid": (den != 0) & (sr > sl) & (star_l[RHO] > 0) & (star_r[RHO] > 0)
                 & (sl < sm) & (sm < sr),
    }


def hlld_flux(wl: np.ndarray, wr: np.ndarray, gamma: float,
              counters: Optional[Dict[str, int]] = None) -> np.ndarray:
    """Five-wave HLLD flux; faces with a degenerate fan fall back to HLL"""
    with np.errstate(divide="ignore", invalid="ignore"):
        fan = hlld_fan(wl, wr, gamma)
        sl, sr, sm = fan["sl"], fan["sr"], fan["sm"]
        sls, srs = fan["sl_star"], fan["sr_star"]
        ul, ur, fl, fr = fan["ul"], fan["ur"], fan["fl"], fan["fr"]

        f_sl = fl + sl * (fan["ul_star"] - ul)
        f_ssl = f_sl + sls * (fan["ul_dstar"] - fan["ul_star"])
        f_sr = fr + sr * (fan["ur_star"] - ur)
        f_ssr = f_sr + srs * (fan["ur_dstar"] - fan["ur_star"])

    inner = np.where(sls > 0, f_sl, np.where(sm > 0, f_ssl, np.where(srs > 0, f_ssr, f_sr)))
    supersonic = (sl > 0) | (sr <= 0)
    flux = np.where(sl > 0, fl, np.where(sr <= 0, fr, inner))

    fallback = (~fan["valid"] | ~np.all(np.isfinite(flux), axis=0)) & ~supersonic
    if np.any(fallback):
        hll = _hll_combine(ul, ur, fl, fr, sl, sr)
        flux = np.where(fallback, hll, flux)
        n = int(np.count_nonzero(fallback))
        if counters is not None:
            counters["hlld_fallback"] = counters.get("hlld_fallback", 0) + n
        logger.debug(f"HLLD fell back to HLL on {n} face(s)")
    flux[BX] = 0.0
    return flux


def riemann_flux(name: str, wl: np.ndarray, wr: np.ndarray, gamma: float,
                 counters: Optional[Dict[str, int]] = None) -> np.ndarray:
    if name == "HLLD":
        return hlld_flux(wl, wr, gamma, counters)
    flux = hll_flux(wl, wr, gamma)
    flux[BX] = 0.0
    return flux
