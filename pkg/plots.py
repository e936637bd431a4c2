"""
Optional plotly figures for dynamics traces and parameter sweeps.

Figures are written as standalone HTML next to the result bundle; they are
not part of the byte-stable output.
"""

import pandas as pd
import plotly.express as px

CHART_COLORS = [
    "#1B3A5C", "#C53030", "#2F855A", "#3182CE",
    "#FC8181", "#68D391", "#2C5282", "#63B3ED",
]


def style_chart(fig, height=400):
    """Apply consistent Plotly theming."""
    fig.update_layout(
        template="plotly_white",
        font=dict(family="Inter, sans-serif", color="#2D3748"),
        colorway=CHART_COLORS,
        height=height,
        margin=dict(l=20, r=20, t=40, b=20),
    )
    return fig


def trace_figure(frame):
    """Local flow of every player against the dynamics round."""
    flows = [c for c in frame.columns if c.startswith("local_flow_")]
    long = frame.melt(id_vars="round", value_vars=flows, var_name="player", value_name="local flow")
    long["player"] = long["player"].str.replace("local_flow_", "player ", regex=False)
    fig = px.line(long, x="round", y="local flow", color="player",
                  title="Best-response dynamics")
    return style_chart(fig)


def sweep_figure(rows):
    """PoA and VoU against the sequence index m, log scale."""
    frame = pd.DataFrame(list(rows))
    long = frame.melt(id_vars="m", value_vars=["poa", "vou"], var_name="metric", value_name="ratio")
    long["metric"] = long["metric"].map({"poa": "Price of Anarchy", "vou": "Value of Unilateral Altruism"})
    fig = px.line(long, x="m", y="ratio", color="metric", markers=True, log_y=True,
                  title="Efficiency ratios along the parameter sequence")
    return style_chart(fig, height=350)


def write_figure(fig, path):
    fig.write_html(str(path), include_plotlyjs="cdn")
    return path
