from models.bandwidth_model import BandwidthPair


def get_bandwidth_serial(pair: BandwidthPair) -> dict:
    serial = {
        "b_t": float(pair.b_t),
        "b_u": float(pair.b_u),
        "source": pair.source,
        "fallback": pair.fallback,
        "reason": pair.reason or "",
        "n": pair.n,
        "sigma2": "" if pair.sigma2 is None else float(pair.sigma2),
    }
    functionals = pair.functionals
    if functionals is not None:
        serial.update(
            {
                "i_tt": functionals.i_tt,
                "i_uu": functionals.i_uu,
                "i_tu": functionals.i_tu,
                "i_f": functionals.i_f,
                "weight": functionals.weight,
                "region_t_min": functionals.region.t_min,
                "region_t_max": functionals.region.t_max,
                "region_u_min": functionals.region.u_min,
                "region_u_max": functionals.region.u_max,
            }
        )
    return serial

