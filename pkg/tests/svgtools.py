"""Helpers for inspecting SVG files written by the report module."""

import re
import xml.etree.ElementTree as ET

SVG = "{http://www.w3.org/2000/svg}"


def parse(path):
    return ET.parse(path).getroot()


def ids_with_prefix(root, prefix):
    pattern = re.compile(rf"^{re.escape(prefix)}\d+(-\d+)?$")
    return sorted(el.get("id") for el in root.iter() if pattern.match(el.get("id") or ""))


def group(root, gid):
    for el in root.iter():
        if el.get("id") == gid:
            return el
    raise KeyError(gid)


def path_points(el):
    """(x, y) vertices of the first <path> below ``el``."""
    path = next(p for p in el.iter(SVG + "path"))
    nums = [float(v) for v in re.findall(r"-?\d+(?:\.\d+)?(?:e-?\d+)?", path.get("d"))]
    return list(zip(nums[0::2], nums[1::2]))
