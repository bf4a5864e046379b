# Configuration and file helpers
