"""Synthetic SIB2 capture records for demos and tests.

These are NOT measurements. Each country gets three operators with a
handful of IE settings, and cells at a location are drawn from a small pool
of PRACH-ConfigIndex values, so most locations end up with cells that share
carrier and index. Format 0 dominates; one country mixes in some format 1.
"""
from __future__ import annotations

import numpy as np

from .analyzer import AreaClass, MeasurementRecord

_AREAS = (AreaClass.URBAN, AreaClass.SUBURBAN, AreaClass.RURAL)
_FORMAT0_POOL = (1, 1, 1, 3, 4, 6, 0, 2, 15)
_FORMAT1_POOL = (16, 17, 19, 20, 22)


def generate_records(n_locations: int = 40, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    records = []
    for country_no in range(1, 4):
        country = f"C{country_no}"
        ops = {}
        for op_no in range(1, 4):
            mno = f"{country}-MNO{op_no}"
            ops[mno] = dict(
                band=int(rng.choice((3, 7, 20))),
                earfcns=[int(e) for e in rng.choice((1300, 1575, 3050, 6300, 6400), size=2,
                                                     replace=False)],
                num_ra_preambles=int(rng.choice((52, 48))),
                power_ramping_step_db=int(rng.choice((2, 4))),
                target=int(rng.choice((-104, -110))),
                trans_max=int(rng.choice((8, 10))),
                window=10,
                cr_timer=int(rng.choice((48, 64))),
                zczc=int(rng.choice((5, 12))),
            )
        enodeb = 1000 * country_no
        for loc_no in range(n_locations):
            loc = f"{country}-L{loc_no:03d}"
            area = _AREAS[int(rng.integers(3))]
            for mno, op in ops.items():
                for earfcn in op["earfcns"]:
                    n_cells = int(rng.integers(1, 6))
                    for _ in range(n_cells):
                        if country_no == 2 and rng.random() < 0.2:
                            index = int(rng.choice(_FORMAT1_POOL))
                        else:
                            index = int(rng.choice(_FORMAT0_POOL))
                        enodeb += 1
                        records.append(MeasurementRecord(
                            country=country, mno=mno, location_id=loc, area_class=area,
                            band=op["band"], earfcn=earfcn, enodeb_id=enodeb,
                            cell_id=int(rng.integers(0, 504)),
                            prach_config_index=index,
                            num_ra_preambles=op["num_ra_preambles"],
                            power_ramping_step_db=op["power_ramping_step_db"],
                            preamble_initial_target_power_dbm=op["target"],
                            preamble_trans_max=op["trans_max"],
                            ra_response_window_sf=op["window"],
                            contention_resolution_timer_sf=op["cr_timer"],
                            highspeed_flag=False,
                            zero_correlation_zone_config=op["zczc"],
                            prach_freq_offset=int(rng.choice((2, 4))),
                        ))
    return records
