"""
Plot Scripts - Self-contained matplotlib Scripts from Sweep CSVs
================================================================

Sinh script Python độc lập (pandas + matplotlib) để vẽ kết quả:
- size / dephasing: log-log J theo N, một series cho mỗi model/γ
- temperature: linear J theo T_1, một series cho mỗi model/N/γ
- entanglement-region: heatmap entangled flag trên (s_1, s_N)
- disorder: scatter J có dephasing theo J không dephasing

Architecture:
- Templates render bằng jinja2 (StrictUndefined: thiếu biến là lỗi)
- Script dùng backend Agg và savefig, không mở cửa sổ
- Script đọc CSV với comment="#" nên header comments được bỏ qua
"""

from __future__ import annotations

import logging
from pathlib import Path

from jinja2 import Environment, StrictUndefined

from src.services.errors import InvalidSpecError

logger = logging.getLogger(__name__)

_env = Environment(undefined=StrictUndefined, keep_trailing_newline=True, trim_blocks=True, lstrip_blocks=True)

_HEADER = '''\
"""Plot for {{ csv_name }} ({{ kind }}). Generated file."""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

CSV_PATH = {{ csv_path | tojson }}
PNG_PATH = {{ png_path | tojson }}

frame = pd.read_csv(CSV_PATH, comment="#")
if "error" in frame:
    frame = frame[frame["error"].fillna("") == ""]
fig, ax = plt.subplots(figsize=(6, 4.5))
'''

_FOOTER = '''\
ax.set_title({{ title | tojson }})
fig.tight_layout()
fig.savefig(PNG_PATH, dpi=120)
print(PNG_PATH)
'''

_BODIES = {
    "loglog": '''\
for (model, gamma), group in frame.groupby(["model", frame["dephasing_rate"].fillna(-1.0)]):
    group = group.sort_values("n_sites")
    group = group[group["heat_current"] > 0]
    label = "classical" if model == "classical" else f"quantum, gamma={gamma:g}"
    ax.loglog(group["n_sites"], group["heat_current"], "o-", label=label)
ax.set_xlabel("N")
ax.set_ylabel("heat current J")
ax.legend()
''',
    "linear": '''\
keys = ["model", "n_sites", frame["dephasing_rate"].fillna(-1.0)]
for (model, n, gamma), group in frame.groupby(keys):
    group = group.sort_values("temperature_left")
    if model == "classical":
        label = f"classical, N={n}"
    else:
        label = f"quantum N={n}, gamma={gamma:g}"
    ax.plot(group["temperature_left"], group["heat_current"], "o-", label=label)
ax.set_xlabel("T_1")
ax.set_ylabel("heat current J")
ax.legend()
''',
    "region": '''\
grid = frame.pivot(index="s_right", columns="s_left", values="entangled")
mesh = ax.pcolormesh(grid.columns, grid.index, grid.values, shading="nearest", cmap="Greys", vmin=0, vmax=1)
fig.colorbar(mesh, ax=ax, label="entangled")
ax.set_xlabel("s_1")
ax.set_ylabel("s_N")
''',
    "scatter": '''\
ax.scatter(frame["current_coherent"], frame["current_dephased"], s=6)
top = max(frame["current_coherent"].max(), frame["current_dephased"].max())
ax.plot([0, top], [0, top], "k--", lw=1)
ax.set_xlabel("J without dephasing")
ax.set_ylabel("J with dephasing")
''',
}

PLOT_KINDS = {
    "size": ("loglog", "Heat current vs chain size"),
    "dephasing": ("loglog", "Heat current vs chain size"),
    "temperature": ("linear", "Heat current vs T_1"),
    "entanglement-region": ("region", "Entanglement region"),
    "disorder": ("scatter", "Disorder ensemble"),
}


def render_plot_script(csv_path: str | Path, kind: str, png_path: str | Path | None = None) -> str:
    try:
        body, title = PLOT_KINDS[kind]
    except KeyError as e:
        raise InvalidSpecError(f"unknown plot kind {kind!r}; expected one of {sorted(PLOT_KINDS)}") from e
    csv_path = Path(csv_path)
    png_path = Path(png_path) if png_path is not None else csv_path.with_suffix(".png")
    template = _env.from_string(_HEADER + _BODIES[body] + _FOOTER)
    return template.render(
        csv_name=csv_path.name,
        kind=kind,
        csv_path=str(csv_path),
        png_path=str(png_path),
        title=title,
    )


def emit_plot_script(csv_path: str | Path, kind: str, script_path: str | Path | None = None) -> Path:
    """
    Ghi plot script cạnh CSV

    Args:
        csv_path: CSV do một experiment sinh ra
        kind: size | dephasing | temperature | entanglement-region | disorder
        script_path: đường dẫn script (default: <csv>_plot.py)

    Returns:
        Path của script

    Raises:
        InvalidSpecError: kind không hỗ trợ
    """
    csv_path = Path(csv_path)
    script = render_plot_script(csv_path, kind)
    script_path = Path(script_path) if script_path is not None else csv_path.with_name(f"{csv_path.stem}_plot.py")
    script_path.parent.mkdir(parents=True, exist_ok=True)
    script_path.write_text(script, encoding="utf-8")
    logger.info("Wrote %s plot script %s", kind, script_path)
    return script_path
