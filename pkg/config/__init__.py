# Application settings
