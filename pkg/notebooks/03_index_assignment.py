# %% [markdown]
# # From a path to feedback labels
#
# Walking the solved path and handing out reflected Gray codes in order makes
# every pair of path neighbours one bit flip apart. The expected loss under a
# binary symmetric feedback channel then counts all Hamming-1 label pairs.

# %%
from ris_index.assignment import assign_from_path, natural_assignment, random_assignment, \
    remap_codebook
from ris_index.codebook import build_codebook, generate_channels
from ris_index.heuristic import solve
from ris_index.loss import ber_from_snr_db, build_loss_matrix, expected_loss

channels = generate_channels(K=32, N=32, M=4, seed=7)
codebook = build_codebook(channels, b=3, seed=7)
loss = build_loss_matrix(channels, codebook)

path = solve(loss).best_pi
labels = assign_from_path(path)
for pos in range(4):
    cw = path[pos]
    print(f"position {pos}: codeword {cw:2d} -> label {labels.as_binary()[cw]}")

# %% [markdown]
# Compare labelings over a sweep of feedback-channel SNRs.

# %%
strategies = {"natural": natural_assignment(32), "random": random_assignment(32, 0),
              "path": labels}
for snr_db in (0, 4, 8):
    q = ber_from_snr_db(snr_db)
    row = "  ".join(f"{name} {expected_loss(loss, a, q):.3e}" for name, a in strategies.items())
    print(f"{snr_db:2d} dB (q={q:.2e}): {row}")

# %% [markdown]
# Reindex the codebook so that slot `label` stores the codeword it names.

# %%
reindexed = remap_codebook(codebook, labels)
print("slot 0 holds codeword", path[0], "->", (reindexed.levels[0] == codebook.levels[path[0]]).all())
