"""Super stable tensegrities, stress certificates and the graph parameters lambda, nu and rd."""
