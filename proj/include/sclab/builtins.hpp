#pragma once

#include <string>
#include <vector>

#include "sclab/netlist.hpp"

namespace sclab {

/// Names of a bus: "<name>[0]" .. "<name>[width-1]" (bit 0 is the LSB).
std::vector<std::string> bus(const std::string& name, int width);

/// Combinational AES S-box: inputs x[0..7], outputs s[0..7].
///
/// The inverse is computed in the tower field GF(((2^2)^2)^2) (36 AND gates);
/// the basis change into the tower and the combined inverse-basis/affine map
/// are XOR networks, and the 0x63 constant is folded in as inverters.
Netlist build_aes_sbox();

/// First-round CPA target: plaintext register -> key XOR -> S-box -> output register.
///
/// Ports: p[0..7] plaintext, k[0..7] key (held constant by the harness),
/// clr (synchronous clear of the output register, driven by the program),
/// q[0..7] registered S-box output. 16 registers. Inputs applied in cycle t
/// appear on q in cycle t + 2.
Netlist build_victim_round(int key_byte_width = 8);

/// Looks up a builtin by name ("aes_sbox", "victim_round").
Netlist builtin_netlist(const std::string& name);

}  // namespace sclab
