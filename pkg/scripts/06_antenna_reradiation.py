"""How much of the received power an antenna re-radiates."""

from skreflect import AntennaCircuit, matched_load, power_breakdown, suggest_alpha

print("R_loss  ratio   alpha (coupling 0.1)")
for r_loss in (0.0, 5.0, 20.0, 73.0, 300.0):
    pb = power_breakdown(matched_load(AntennaCircuit(r_loss=r_loss, r_rad=73.0, x_a=42.5)))
    print(f"{r_loss:6.1f}  {pb.ratio:.3f}   {suggest_alpha(pb.ratio, 0.1):.4f}")

# A lossless antenna under conjugate match re-radiates half of what it
# collects. The coupling factor is a free modelling choice; it folds in
# everything between the re-radiated power and what reaches Eve.
