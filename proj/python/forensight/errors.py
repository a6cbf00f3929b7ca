class ForensightError(Exception):
    """A failure raised by the native core, carrying its stable error code."""

    def __init__(self, code, message, status):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.status = status
