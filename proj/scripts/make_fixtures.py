#!/usr/bin/env python3
"""Regenerates the bundled fixtures under tests/fixtures. Output is deterministic."""

import csv
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def ip(rng):
    return f"10.251.{rng.randint(30, 220)}.{rng.randint(2, 250)}"


def hdfs(seed=20081109, blocks=84, anomaly_rate=0.25):
    rng = random.Random(seed)
    events = []  # (time, seq, component, template_id, content, block)
    labels = {}
    t0 = 203500
    seq = 0

    def emit(t, component, eid, content, block):
        nonlocal seq
        events.append((t, seq, component, eid, content, block))
        seq += 1

    for b in range(blocks):
        block = f"blk_{'-' if rng.random() < 0.5 else ''}{rng.randint(10**17, 10**19)}"
        anomalous = rng.random() < anomaly_rate
        labels[block] = "Anomaly" if anomalous else "Normal"
        t = t0 + b * 11 + rng.randint(0, 4)
        path = f"/user/root/rand{rng.randint(1, 9)}/_temporary/_task_200811092030_0001_m_{b:06d}_0/part-{b:05d}"
        emit(t, "dfs.FSNamesystem", "E1", f"BLOCK* NameSystem.allocateBlock: {path}. {block}", block)
        nodes = [ip(rng) for _ in range(3)]
        size = rng.choice([67108864, 67108864, 3549717, 91178])
        failed_writer = anomalous and rng.random() < 0.55
        for i, node in enumerate(nodes):
            emit(t + 1, "dfs.DataNode$DataXceiver",
                 "E2", f"Receiving block {block} src: /{ip(rng)}:{rng.randint(30000, 60000)} dest: /{node}:50010", block)
        if anomalous:
            emit(t + 2, "dfs.DataNode$DataXceiver", "E8",
                 f"writeBlock {block} received exception java.io.IOException: Could not read from stream", block)
            if rng.random() < 0.3:
                emit(t + 3, "dfs.DataNode$PacketResponder", "E10",
                     f"PacketResponder {block} {rng.randint(0, 2)} Exception java.io.InterruptedIOException: "
                     f"Interruped while waiting for IO on channel java.nio.channels.SocketChannel", block)
        if rng.random() < (0.4 if anomalous else 0.05):
            emit(t + 2, "dfs.DataNode$DataXceiver", "E9",
                 f"Exception in receiveBlock for block {block} java.io.IOException: Connection reset by peer", block)
        survivors = nodes[:1] if failed_writer else nodes
        for i, node in enumerate(survivors):
            emit(t + 4, "dfs.DataNode$PacketResponder", "E3",
                 f"PacketResponder {2 - i} for block {block} terminating", block)
            emit(t + 4, "dfs.DataNode$PacketResponder", "E4",
                 f"Received block {block} of size {size} from /{node}", block)
            emit(t + 5, "dfs.FSNamesystem", "E5",
                 f"BLOCK* NameSystem.addStoredBlock: blockMap updated: {node}:50010 is added to {block} size {size}",
                 block)
        if rng.random() < 0.3:
            emit(t + 6, "dfs.DataBlockScanner", "E6", f"Verification succeeded for {block}", block)
        for _ in range(rng.choice([0, 0, 1, 2])):
            emit(t + 7, "dfs.DataNode$DataXceiver", "E7", f"{nodes[0]}:50010 Served block {block} to /{ip(rng)}", block)
        if rng.random() < 0.6:
            emit(t + 9, "dfs.FSNamesystem", "E11",
                 f"BLOCK* NameSystem.delete: {block} is added to invalidSet of {nodes[0]}:50010", block)
            emit(t + 10, "dfs.FSDataset", "E12",
                 f"Deleting block {block} file /mnt/hadoop/dfs/data/current/subdir{rng.randint(1, 60)}/{block}",
                 block)
    events.sort(key=lambda e: (e[0], e[1]))

    templates = {
        "E1": "BLOCK* NameSystem.allocateBlock: <*>",
        "E2": "Receiving block <*> src: <*> dest: <*>",
        "E3": "PacketResponder <*> for block <*> terminating",
        "E4": "Received block <*> of size <*> from <*>",
        "E5": "BLOCK* NameSystem.addStoredBlock: blockMap updated: <*> is added to <*> size <*>",
        "E6": "Verification succeeded for <*>",
        "E7": "<*> Served block <*> to <*>",
        "E8": "writeBlock <*> received exception java.io.IOException: Could not read from stream",
        "E9": "Exception in receiveBlock for block <*> java.io.IOException: Connection reset by peer",
        "E10": "PacketResponder <*> <*> Exception java.io.InterruptedIOException: Interruped while waiting for IO on "
               "channel java.nio.channels.SocketChannel",
        "E11": "BLOCK* NameSystem.delete: <*> is added to invalidSet of <*>",
        "E12": "Deleting block <*> file <*>",
    }
    lines = []
    rows = []
    for n, (t, _, component, eid, content, _) in enumerate(events, start=1):
        secs = t % 60
        mins = (t // 60) % 60
        hours = 20 + (t // 3600) % 4
        date, time_, pid = "081109", f"{hours:02d}{mins:02d}{secs:02d}", str(100 + (n * 37) % 900)
        level = "WARN" if eid in ("E8", "E9", "E10") else "INFO"
        lines.append(f"{date} {time_} {pid} {level} {component}: {content}")
        rows.append([n, date, time_, pid, level, component, content, eid, templates[eid]])

    (OUT / "hdfs_sample.log").write_text("\n".join(lines) + "\n")
    with open(OUT / "hdfs_labels.csv", "w", newline="") as f:
        f.write("BlockId,Label\n")
        for block, label in labels.items():
            f.write(f"{block},{label}\n")
    with open(OUT / "hdfs_structured.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["LineId", "Date", "Time", "Pid", "Level", "Component", "Content", "EventId", "EventTemplate"])
        w.writerows(rows)


def bgl(seed=20050603, lines=1000):
    rng = random.Random(seed)
    nodes = [f"R{r:02d}-M{m}-N{n}-C:J{j:02d}-U{u:02d}" for r in range(3) for m in range(2) for n in range(2)
             for j in (2, 12, 16) for u in (1, 11)]
    normal = [
        (30, "RAS KERNEL INFO", lambda: "instruction cache parity error corrected"),
        (20, "RAS KERNEL INFO", lambda: f"generating core.{rng.randint(100, 9999)}"),
        (15, "RAS KERNEL INFO", lambda: f"CE sym {rng.randint(0, 35)}, at 0x{rng.randint(0, 2**32):08x}, "
                                        f"mask 0x{rng.randint(0, 255):02x}"),
        (12, "RAS KERNEL INFO", lambda: f"total of {rng.randint(1, 40)} ddr error(s) detected and corrected"),
        (8, "RAS APP FATAL", lambda: f"ciod: failed to read message prefix on control stream "
                                     f"(CioStream socket to 172.16.96.{rng.randint(1, 200)}:{rng.randint(30000, 60000)}"),
        (6, "RAS KERNEL INFO", lambda: "shutdown complete"),
        (1, "RAS KERNEL INFO", lambda: "Node card VPD check: U01 node in processor card slot J10 is not installed"),
    ]
    anomalous = [
        ("KERNDTLB", "RAS KERNEL FATAL", lambda: "data TLB error interrupt"),
        ("KERNSTOR", "RAS KERNEL FATAL", lambda: "data storage interrupt"),
        ("APPSEV", "RAS APP FATAL", lambda: f"ciod: Error reading message prefix after LOGIN_MESSAGE on CioStream "
                                            f"socket to 172.16.96.{rng.randint(1, 200)}:{rng.randint(30000, 60000)}: "
                                            f"Link has been severed"),
    ]
    weights = [w for w, _, _ in normal]
    out = []
    t = 1117838570
    burst = 0
    for i in range(lines):
        t += rng.randint(0, 3)
        if burst == 0 and rng.random() < 0.02:
            burst = rng.randint(2, 8)
        node = rng.choice(nodes)
        stamp = f"2005-06-03-15.{(t // 60) % 60:02d}.{t % 60:02d}.{rng.randint(0, 999999):06d}"
        if burst > 0:
            tag, kind, content = rng.choice(anomalous)
            burst -= 1
        else:
            _, kind, content = rng.choices(normal, weights=weights)[0]
            tag = "-"
        out.append(f"{tag} {t} 2005.06.03 {node} {stamp} {node} {kind} {content()}")
    (OUT / "bgl_sample.log").write_text("\n".join(out) + "\n")
    first = next(i for i, line in enumerate(out) if not line.startswith("- "))
    start = max(0, first - 20)
    (OUT / "bgl_50.log").write_text("\n".join(out[start:start + 50]) + "\n")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    hdfs()
    bgl()
