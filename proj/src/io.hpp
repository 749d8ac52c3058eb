#pragma once

#include <string>
#include <vector>

#include "flow.hpp"
#include "grid.hpp"
#include "mask.hpp"
#include "potential.hpp"

namespace bflow {

// All files are written atomically (temporary file + rename), with LF line
// endings, '.' decimals and 17 significant digits for reals.

void write_file_atomic(const std::string& path, const std::string& content);

std::string mask_to_pgm(const Mask& m);  // P2, 255 inside / 0 outside; 2D only
std::string mask_to_csv(const Mask& m);  // i,j[,k],inside
std::string field_to_csv(const Field& f);  // i,j[,k],value
std::string ledger_to_csv(const std::vector<FlowState>& states);
std::string trace_to_csv(const std::vector<BoundarySample>& samples, int dim,
                         const std::string& value_name);
std::string format_real(double v);

}  // namespace bflow
