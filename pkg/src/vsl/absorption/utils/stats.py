class StreamingMovingAverageByCount(object):
    """Moving average over the last `window_size` appended values."""

    def __init__(self, window_size):
        if window_size < 1:
            raise ValueError(f"window_size must be positive, got {window_size}")
        self.window_size = window_size
        self.values = []
        self.sum = 0.0

    def append(self, value):
        self.values.append(value)
        self.sum += value
        if len(self.values) > self.window_size:
            self.sum -= self.values.pop(0)
        return self.average()

    def average(self) -> float:
        if not self.values:
            return float("nan")
        return float(self.sum) / len(self.values)

    def __str__(self):
        return (f"StreamingMovingAverageByCount["
                f"window_size={self.window_size}, "
                f"count={len(self.values)}, "
                f"average={self.average()}"
                f"]")
