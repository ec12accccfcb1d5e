"""Plants, controller design, references and per-loop runtime state."""
