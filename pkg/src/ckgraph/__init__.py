"""Classification of directed graphs and k-graphs."""
