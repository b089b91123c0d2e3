"""Full-scale reproductions of the gate schemes; marked slow."""
