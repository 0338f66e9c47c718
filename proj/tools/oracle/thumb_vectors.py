#!/usr/bin/env python3
# Copyright m3lv contributors.
# Licensed under the Apache License, Version 2.0, see LICENSE for details.
# SPDX-License-Identifier: Apache-2.0
"""Produce frozen encode/decode vectors with an external assembler.

Each vector pairs the assembler's output halfword with the decoded field
record the library is expected to produce. Needs clang (thumbv6m target) and
GNU objdump.

    python3 tools/oracle/thumb_vectors.py > tests/data/thumb_vectors.txt
"""

import random
import re
import subprocess
import sys
import tempfile
from pathlib import Path

DP2 = ["ands", "eors", "lsls_reg", "lsrs_reg", "asrs_reg", "adcs", "sbcs", "rors", "orrs", "bics"]
COND = ["eq", "ne", "cs", "cc", "mi", "pl", "vs", "vc", "hi", "ls", "ge", "lt", "gt", "le"]


def rec(name, asm, rd=0, rn=0, rm=0, imm=0, cond=0):
    return {"name": name, "asm": asm, "rd": rd, "rn": rn, "rm": rm, "imm": imm, "cond": cond}


def lo(rng):
    return rng.randrange(8)


def sample(name, rng, imm=None):
    """One vector for `name`; `imm` pins the immediate field."""
    def pick(width):
        return rng.randrange(1 << width) if imm is None else imm

    if name == "movs_imm":
        d, v = lo(rng), pick(8)
        return rec(name, f"movs r{d}, #{v}", rd=d, imm=v)
    if name == "cmp_imm":
        n, v = lo(rng), pick(8)
        return rec(name, f"cmp r{n}, #{v}", rn=n, imm=v)
    if name in ("adds_imm8", "subs_imm8"):
        d, v = lo(rng), pick(8)
        # Small immediates with distinct registers would pick the imm3 form,
        # so the two-operand syntax is used throughout.
        return rec(name, f"{name[:4]} r{d}, #{v}", rd=d, rn=d, imm=v)
    if name in ("adds_reg", "subs_reg"):
        d, n, m = lo(rng), lo(rng), lo(rng)
        return rec(name, f"{name[:4]} r{d}, r{n}, r{m}", rd=d, rn=n, rm=m)
    if name in ("adds_imm3", "subs_imm3"):
        d, n, v = lo(rng), lo(rng), pick(3)
        return rec(name, f"{name[:4]} r{d}, r{n}, #{v}", rd=d, rn=n, imm=v)
    if name in DP2:
        d, m = lo(rng), lo(rng)
        return rec(name, f"{name.split('_')[0]} r{d}, r{m}", rd=d, rn=d, rm=m)
    if name in ("tst", "cmp_reg", "cmn"):
        n, m = lo(rng), lo(rng)
        return rec(name, f"{name.split('_')[0]} r{n}, r{m}", rn=n, rm=m)
    if name == "rsbs":
        d, n = lo(rng), lo(rng)
        return rec(name, f"rsbs r{d}, r{n}, #0", rd=d, rn=n)
    if name == "muls":
        d, n = lo(rng), lo(rng)
        return rec(name, f"muls r{d}, r{n}, r{d}", rd=d, rn=n, rm=d)
    if name == "mvns":
        d, m = lo(rng), lo(rng)
        return rec(name, f"mvns r{d}, r{m}", rd=d, rm=m)
    if name in ("lsls_imm", "lsrs_imm", "asrs_imm"):
        d, m, v = lo(rng), lo(rng), pick(5)
        if name == "lsls_imm" and v == 0:
            return rec(name, f"movs r{d}, r{m}", rd=d, rm=m, imm=0)
        shown = 32 if v == 0 else v
        return rec(name, f"{name[:4]} r{d}, r{m}, #{shown}", rd=d, rm=m, imm=v)
    if name in ("str_imm", "ldr_imm", "strb_imm", "ldrb_imm"):
        t, n, v = lo(rng), lo(rng), pick(5)
        scale = 1 if "b_" in name else 4
        return rec(name, f"{name.split('_')[0]} r{t}, [r{n}, #{v * scale}]", rd=t, rn=n, imm=v)
    if name == "ldr_lit":
        t, v = lo(rng), pick(8)
        return rec(name, f"ldr r{t}, [pc, #{v * 4}]", rd=t, imm=v)
    if name == "b_cond":
        c, v = rng.randrange(14), pick(8)
        off = (v - 256 if v >= 128 else v) * 2
        return rec(name, f"b{COND[c]}.n {{T}}", imm=v, cond=c) | {"target": off}
    if name == "b":
        v = pick(11)
        off = (v - 2048 if v >= 1024 else v) * 2
        return rec(name, "b.n {T}", imm=v, cond=14) | {"target": off}
    if name == "bx":
        m = rng.randrange(16)
        reg = {13: "sp", 14: "lr", 15: "pc"}.get(m, f"r{m}")
        return rec(name, f"bx {reg}", rm=m)
    if name == "nop":
        return rec(name, "nop")
    if name == "bkpt":
        v = pick(8)
        return rec(name, f"bkpt #{v}", imm=v)
    raise ValueError(name)


NAMES = ["movs_imm", "cmp_imm", "adds_imm8", "subs_imm8", "adds_reg", "subs_reg", "adds_imm3", "subs_imm3",
         "ands", "eors", "lsls_reg", "lsrs_reg", "asrs_reg", "adcs", "sbcs", "rors", "tst", "rsbs", "cmp_reg",
         "cmn", "orrs", "muls", "bics", "mvns", "lsls_imm", "lsrs_imm", "asrs_imm", "str_imm", "ldr_imm",
         "strb_imm", "ldrb_imm", "ldr_lit", "b_cond", "b", "bx", "nop", "bkpt"]

WIDTH = {"movs_imm": 8, "cmp_imm": 8, "adds_imm8": 8, "subs_imm8": 8, "adds_imm3": 3, "subs_imm3": 3,
         "lsls_imm": 5, "lsrs_imm": 5, "asrs_imm": 5, "str_imm": 5, "ldr_imm": 5, "strb_imm": 5,
         "ldrb_imm": 5, "ldr_lit": 8, "b_cond": 8, "b": 11, "bkpt": 8}


def vectors(seed, per_mnemonic):
    rng = random.Random(seed)
    out = []
    for name in NAMES:
        if name in WIDTH:
            w = WIDTH[name]
            for v in sorted({0, 1, (1 << w) - 1, 1 << (w - 1)}):
                out.append(sample(name, rng, imm=v))
        for _ in range(per_mnemonic):
            out.append(sample(name, rng))
    return out


def assemble(vecs):
    lines = [".syntax unified", ".thumb", ".text"]
    for k, v in enumerate(vecs):
        asm = v["asm"]
        if "target" in v:
            lines.append(f".Lt{k} = . + 4 + ({v['target']})")
            asm = asm.replace("{T}", f".Lt{k}")
        lines.append(asm)
    with tempfile.TemporaryDirectory() as tmp:
        src, obj = Path(tmp, "v.s"), Path(tmp, "v.o")
        src.write_text("\n".join(lines) + "\n")
        subprocess.run(["clang", "--target=thumbv6m-none-eabi", "-c", str(src), "-o", str(obj)], check=True)
        dump = subprocess.run(["objdump", "-s", "-j", ".text", str(obj)], check=True, capture_output=True,
                              text=True).stdout
    data = bytearray()
    for line in dump.splitlines():
        m = re.match(r"^ ([0-9a-f]{4,}) ((?:[0-9a-f]{2,8} ?){1,4})", line)
        if m:
            data += bytes.fromhex(m.group(2).replace(" ", ""))
    if len(data) != 2 * len(vecs):
        raise SystemExit(f"expected {2 * len(vecs)} bytes, got {len(data)}")
    return [data[2 * i] | (data[2 * i + 1] << 8) for i in range(len(vecs))]


def main():
    vecs = vectors(seed=20240501, per_mnemonic=24)
    words = assemble(vecs)
    print("# halfword mnemonic rd rn rm imm cond | assembler source")
    for hw, v in zip(words, vecs):
        asm = v["asm"].replace("{T}", f".{v['target'] + 4:+d}") if "target" in v else v["asm"]
        print(f"{hw:04x} {v['name']} {v['rd']} {v['rn']} {v['rm']} {v['imm']} {v['cond']} | {asm}")


if __name__ == "__main__":
    sys.exit(main())
