#pragma once

namespace zk {

// C-infinity smoothstep on [0, 1]: 0 at the left, 1 at the right, all
// derivatives vanishing at both ends.
double smoothstep(double t);
double smoothstep_prime(double t);

// Cutoff: 0 below -2, 1 above -1, smooth and nondecreasing in between.
double cutoff_chi(double x);
double cutoff_chi_prime(double x);

}  // namespace zk
