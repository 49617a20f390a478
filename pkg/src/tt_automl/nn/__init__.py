"""Sequential numpy networks: model graph, layers, training and synthetic data."""
