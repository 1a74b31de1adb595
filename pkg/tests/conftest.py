from hypothesis import settings

# First calls trigger numba compilation, so per-example deadlines are meaningless.
settings.register_profile("snash", deadline=None, max_examples=50)
settings.load_profile("snash")
