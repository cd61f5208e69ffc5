# Dynamic subgraph listing skills package
