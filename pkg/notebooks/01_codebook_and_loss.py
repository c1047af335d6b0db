# %% [markdown]
# # Codebooks and mismatch loss
#
# A small MISO-RIS deployment: UEs scattered over a square, one beam-steering
# codeword per UE, and the matrix of relative SNR losses when a neighbouring
# codeword is applied by mistake.

# %%
import numpy as np

from ris_index.codebook import build_codebook, generate_channels, snr_table
from ris_index.loss import build_loss_matrix

channels = generate_channels(K=16, N=32, M=4, seed=1)
codebook = build_codebook(channels, b=3, seed=1)
print("codeword levels, first four UEs:\n", codebook.levels[:4])

# %% [markdown]
# Each row of the SNR table is one UE; the diagonal is that UE's own codeword.

# %%
S = snr_table(channels, codebook)
own_best = np.mean(np.argmax(S, axis=1) == np.arange(channels.K))
print(f"UEs served best by their own codeword: {own_best:.0%}")

# %% [markdown]
# The loss matrix is the relative SNR drop. It is not symmetric; the solvers
# work on the mean of it and its transpose.

# %%
loss = build_loss_matrix(channels, codebook)
np.set_printoptions(precision=2, suppress=True)
print(loss.d[:5, :5])
print("max asymmetry:", np.abs(loss.d - loss.d.T).max())
