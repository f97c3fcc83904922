# Marks the repository root so that `config` and `phasespace` import under pytest.
