"""Unit conversions.

All powers are carried internally in linear milliwatts, so 0 dBm maps to 1.0.
Energy efficiency is the only place watts appear; the conversion happens once
at that boundary.
"""

import numpy as np


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=float))


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def mw_to_w(mw):
    return np.asarray(mw, dtype=float) * 1e-3
