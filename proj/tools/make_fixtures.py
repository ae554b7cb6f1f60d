#!/usr/bin/env python3
"""Regenerates the scenario fixtures under tests/fixtures."""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def el(id, type, sid, provider=None, apps=None):
    e = {"id": id, "type": type, "sid": sid}
    if provider:
        e["provider"] = provider
    if apps:
        e["apps"] = apps
    return e


def link(id, a, b, delay, protected=False, backup_of=None, **extra):
    l = {"id": id, "from": a, "to": b, "delay_ms": delay}
    if protected:
        l["protected"] = True
    if backup_of:
        l["backup_of"] = backup_of
    l.update(extra)
    return l


def protected_pair(id, a, b, delay, backup_delay):
    return [link(id, a, b, delay, protected=True),
            link(id + "-bk", a, b, backup_delay, backup_of=id)]


REF5 = {
    "edcs": [
        {"id": "edc-1", "elements": [el("r-1", "FabricRouter", 100), el("cu-1", "CU", 1210),
                                     el("upf-1", "UPF", 1211), el("ec-1", "EC", 1212)]},
        {"id": "edc-2", "elements": [el("r-2", "FabricRouter", 101), el("cu-2", "CU", 1220),
                                     el("upf-2", "UPF", 1221)]},
        {"id": "edc-3", "elements": [el("r-3", "FabricRouter", 102), el("cu-3", "CU", 1230)]},
        {"id": "edc-4", "elements": [el("r-4", "FabricRouter", 103), el("upf-4", "UPF", 1240),
                                     el("ec-4", "EC", 1241)]},
        {"id": "edc-5", "elements": [el("r-5", "FabricRouter", 104), el("ec-5", "EC", 1250)]},
    ],
    "links": protected_pair("l12", "r-1", "r-2", 0.4, 0.6)
    + protected_pair("l13", "r-1", "r-3", 0.55, 0.75)
    + protected_pair("l34", "r-3", "r-4", 0.5, 0.7)
    + protected_pair("l35", "r-3", "r-5", 0.6, 0.8)
    + [link("l45", "r-4", "r-5", 1.2), link("l14", "r-1", "r-4", 1.5)],
}

# Three EDCs around a hub; any EC outside the serving EDC is beyond the class 0 bound.
STAR3 = {
    "edcs": [
        {"id": "edc-a", "elements": [el("r-a", "FabricRouter", 100), el("cu-a", "CU", 1210),
                                     el("upf-a", "UPF", 1211), el("ec-a", "EC", 1212)]},
        {"id": "edc-b", "elements": [el("r-b", "FabricRouter", 101), el("cu-b", "CU", 1220),
                                     el("upf-b", "UPF", 1221), el("ec-b", "EC", 1222)]},
        {"id": "edc-c", "elements": [el("r-c", "FabricRouter", 102), el("cu-c", "CU", 1230),
                                     el("upf-c", "UPF", 1231), el("ec-c", "EC", 1232)]},
    ],
    "links": [link("l-ab", "r-a", "r-b", 3.0), link("l-ac", "r-a", "r-c", 3.0)],
}

AWI = {
    "edcs": [
        {"id": "edc-1", "elements": [el("r-1", "FabricRouter", 100), el("cu-1", "CU", 1210, "p1"),
                                     el("upf-1", "UPF", 1211, "p1"), el("ec-1", "EC", 1212, "p1")]},
        {"id": "edc-2", "elements": [el("r-2", "FabricRouter", 101), el("cu-2", "CU", 1220, "p2"),
                                     el("upf-2", "UPF", 1221, "p2"), el("ec-2", "EC", 1222, "p2")]},
        {"id": "edc-3", "elements": [el("r-3", "FabricRouter", 102), el("ec-3", "EC", 1230, "neutral")]},
    ],
    "links": [link("l13", "r-1", "r-3", 1.0), link("l23", "r-2", "r-3", 1.0),
              link("l12", "r-1", "r-2", 2.0)],
}

FAR2 = {
    "edcs": [
        {"id": "edc-1", "elements": [el("r-1", "FabricRouter", 100), el("cu-1", "CU", 1210),
                                     el("upf-1", "UPF", 1211)]},
        {"id": "edc-2", "elements": [el("r-2", "FabricRouter", 101), el("ec-2", "EC", 1220)]},
    ],
    "links": protected_pair("l12", "r-1", "r-2", 3.0, 3.2),
}


def topo(t):
    return {"format_version": 1, **t}


def scenario(name, topology, events, **extra):
    doc = {"format_version": 1, "name": name, "seed": 7, "topology": topo(topology)}
    doc.update(extra)
    doc["events"] = events
    return doc


def attach(t, ue, cu, bearers, **kw):
    return {"t_ms": t, "kind": "attach", "ue": ue, "cu": cu, "bearers": bearers, **kw}


def echo(t, ue, qfi, label, **kw):
    return {"t_ms": t, "kind": "echo", "ue": ue, "qfi": qfi, "label": label, **kw}


C0 = {"qfi": 5}
C1 = {"qfi": 9}


def fixtures():
    out = {}
    out["empty"] = scenario("empty", REF5, [])

    ev = []
    for i, cu in enumerate(["cu-1", "cu-2", "cu-3"]):
        ue = f"ue-{i + 1}"
        ev.append(attach(10 * i, ue, cu, [C0, C1]))
        ev.append(echo(100 + 10 * i, ue, 5, f"{ue}-c0"))
        ev.append(echo(101 + 10 * i, ue, 9, f"{ue}-c1"))
    ev.append(attach(50, "ue-4", "cu-2", [{"qfi": 5, "app": {"sid": 9005}}]))
    ev.append(echo(150, "ue-4", 5, "ue-4-c0-far"))
    out["oer_basic"] = scenario("oer_basic", REF5, ev,
                                apps=[{"sid": 9005, "hosts": ["ec-5"]}])

    out["table1"] = dict(out["oer_basic"], name="table1")
    out["no_feasible_path"] = scenario("no_feasible_path", FAR2, [
        attach(0, "ue-1", "cu-1", [C0], expect="fail", label="class0-too-far"),
        attach(10, "ue-2", "cu-1", [C1]),
        echo(100, "ue-2", 9, "class1-far"),
    ])

    out["shape_same_edc"] = scenario("shape_same_edc", REF5, [
        attach(0, "ue-1", "cu-1", [C0]),
        echo(100, "ue-1", 5, "same-edc"),
    ])
    out["shape_remote_upf_ec"] = scenario("shape_remote_upf_ec", REF5, [
        attach(0, "ue-1", "cu-3", [C0]),
        echo(100, "ue-1", 5, "remote-upf-ec"),
    ])
    out["shape_remote_ec"] = scenario("shape_remote_ec", REF5, [
        attach(0, "ue-1", "cu-2", [{"qfi": 5, "app": {"sid": 9005}}]),
        echo(100, "ue-1", 5, "remote-ec"),
    ], apps=[{"sid": 9005, "hosts": ["ec-5"]}])

    out["mer_handover"] = scenario("mer_handover", REF5, [
        attach(0, "ue-1", "cu-1", [C1]),
        echo(50, "ue-1", 9, "before"),
        {"t_ms": 97, "kind": "send", "ue": "ue-1", "qfi": 9, "direction": "DL", "count": 20,
         "interval_ms": 1, "label": "dl"},
        {"t_ms": 100, "kind": "measurement_report", "ue": "ue-1", "target_cu": "cu-2"},
        echo(150, "ue-1", 9, "after"),
        {"t_ms": 151, "kind": "send", "ue": "ue-1", "qfi": 9, "direction": "UL", "label": "ul-after"},
    ])

    out["multi_bearer"] = scenario("multi_bearer", REF5, [
        attach(0, "ue-1", "cu-1", [C0, {"qfi": 9, "app": {"sid": 9101}}]),
        echo(50, "ue-1", 5, "c0-before"),
        echo(51, "ue-1", 9, "c1-before"),
        {"t_ms": 100, "kind": "measurement_report", "ue": "ue-1", "target_cu": "cu-2"},
        echo(150, "ue-1", 5, "c0-after"),
        echo(151, "ue-1", 9, "c1-after"),
    ], apps=[{"sid": 9101, "hosts": ["ec-4"]}])

    out["restoration"] = scenario("restoration", REF5, [
        attach(0, "ue-1", "cu-3", [C0]),
        echo(50, "ue-1", 5, "before-cut"),
        {"t_ms": 100, "kind": "link_fail", "link": "l34"},
        echo(110, "ue-1", 5, "in-window-1", expect="dropped"),
        echo(140, "ue-1", 5, "in-window-2", expect="dropped"),
        echo(160, "ue-1", 5, "after-restore", expect="delivered"),
    ])

    def mobility(mode, target, name):
        events = [attach(10, "ue-1", "cu-a", [C0]), echo(50, "ue-1", 5, "before")]
        for t, hint in [(100, 10.0), (200, 7.0), (300, 4.0)]:
            events.append({"t_ms": t, "kind": "mobility_sample", "ue": "ue-1", "edc": "edc-a",
                           "hint": hint, "neighbor_edc": "edc-b"})
        events.append({"t_ms": 400, "kind": "measurement_report", "ue": "ue-1", "target_cu": target})
        events.append(echo(500, "ue-1", 5, "after"))
        return scenario(name, STAR3, events, defaults={"awr_mode": mode})

    out["awr_predictive"] = mobility("predictive", "cu-b", "awr_predictive")
    out["awr_reactive"] = mobility("reactive", "cu-b", "awr_reactive")
    out["awr_mispredict"] = mobility("predictive", "cu-c", "awr_mispredict")

    out["awi"] = scenario("awi", AWI, [
        attach(0, "ue-1", "cu-1", [{"qfi": 9, "app": {"sid": 9100}},
                                   {"qfi": 8, "class_id": 1, "app": {"sid": 9200, "kind": "anycast"}}]),
        attach(0, "ue-2", "cu-2", [{"qfi": 9, "app": {"sid": 9100}},
                                   {"qfi": 8, "class_id": 1, "app": {"sid": 9200, "kind": "anycast"}}]),
        echo(50, "ue-1", 9, "ue-1-shared"),
        echo(50, "ue-2", 9, "ue-2-shared"),
        echo(51, "ue-1", 8, "ue-1-anycast"),
        echo(51, "ue-2", 8, "ue-2-anycast"),
    ], apps=[{"sid": 9100, "hosts": ["ec-3"]},
             {"sid": 9200, "kind": "anycast", "hosts": ["ec-1", "ec-2"]}])
    return out


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in fixtures().items():
        (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")
    (OUT / "ref5_topology.json").write_text(json.dumps(topo(REF5), indent=2) + "\n")


if __name__ == "__main__":
    main()
