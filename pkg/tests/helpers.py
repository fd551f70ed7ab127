"""Shared fixtures: the national-register count tables used across tests.

TABLE1 is the two-year marginal table (window s=2, cohorts G=5).  TABLE3
is the same panel stratified by cohort; its first-year failure count for
cohort t=1 carries a -30 adjustment so that the stratified counts pool
exactly to the marginal table (the published stratified figures overshoot
the marginal first-year total by 30).
"""

from __future__ import annotations

import io

from geomlife.panel_io import AggregateTable, parse_aggregate, serialize_aggregate

S, G = 2, 5

# (count_d1, count_d2, count_censored)
TABLE1_ROW = (168112, 107050, 1172652)

TABLE3_WIDE = {
    0: (18687, 18633, 292566),
    1: (34549, 27464, 278223),
    2: (35588, 23353, 209649),
    3: (42272, 20305, 200411),
    4: (37016, 17295, 191803),
}

TABLE1_M = sum(TABLE1_ROW)  # 1_447_814
TABLE1_M_UNCENS = TABLE1_ROW[0] + TABLE1_ROW[1]  # 275_162
TABLE1_DURATION_SUM = 1 * TABLE1_ROW[0] + 2 * TABLE1_ROW[1]  # 382_212
TABLE1_RISK_TIME = TABLE1_DURATION_SUM + S * TABLE1_ROW[2]  # 2_727_516


def table1() -> AggregateTable:
    return AggregateTable.from_wide({None: TABLE1_ROW}, s=S, G=G)


def table3() -> AggregateTable:
    return AggregateTable.from_wide(TABLE3_WIDE, s=S, G=G)


def table1_csv() -> str:
    buf = io.StringIO()
    serialize_aggregate(table1(), buf)
    return buf.getvalue()


def table3_csv() -> str:
    buf = io.StringIO()
    serialize_aggregate(table3(), buf)
    return buf.getvalue()


def parse_csv(text: str, s: int = S, g: int = G) -> AggregateTable:
    return parse_aggregate(io.StringIO(text), s=s, G=g)
