"""
tools/dot.py
Formula Diagram export. Inputs are boxes, Parameters triangles, Calculated
variables circles and Outputs ovals; the repeating part of the model sits in
one dashed cluster named after the dimension.
"""

import pydot

from core.model import Model, VariableKind, references

SHAPES = {
    VariableKind.INPUT: "box",
    VariableKind.PARAMETER: "triangle",
    VariableKind.CALCULATED: "circle",
    VariableKind.OUTPUT: "oval",
}


def formula_diagram(model: Model) -> pydot.Dot:
    graph = pydot.Dot("formula_diagram", graph_type="digraph", rankdir="LR")
    cluster = None
    if any(v.repeating for v in model.variables):
        cluster = pydot.Cluster(
            "repeating", label=f'"{model.dimension.name}"', style="dashed",
        )

    for var in model.variables:
        node = pydot.Node(var.canonical_name, label=f'"{var.display_label}"', shape=SHAPES[var.kind])
        (cluster if var.repeating else graph).add_node(node)
    if cluster is not None:
        graph.add_subgraph(cluster)

    for var in model.calculated:
        for ref in references(var.formula):
            graph.add_edge(pydot.Edge(ref, var.canonical_name))
    return graph


def to_dot(model: Model) -> str:
    return formula_diagram(model).to_string()
