#include "io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace bflow {

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) fail(ErrorCode::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) fail(ErrorCode::Io, "rename to " + target.string() + " failed: " + ec.message());
}

std::string mask_to_pgm(const Mask& m) {
    const Grid& g = *m.grid;
    require(g.dim == 2, ErrorCode::InvalidArgument, "PGM snapshots are 2D only");
    std::string out = "P2\n" + std::to_string(g.cells[0]) + " " + std::to_string(g.cells[1]) +
                      "\n255\n";
    for (int j = g.cells[1] - 1; j >= 0; --j) {
        for (int i = 0; i < g.cells[0]; ++i) {
            out += m.at(g.index(i, j)) ? "255" : "0";
            out += i + 1 < g.cells[0] ? ' ' : '\n';
        }
    }
    return out;
}

std::string mask_to_csv(const Mask& m) {
    const Grid& g = *m.grid;
    std::string out = g.dim == 3 ? "i,j,k,inside\n" : "i,j,inside\n";
    for (std::int64_t c = 0; c < g.total; ++c) {
        const auto ijk = g.unpack(c);
        out += std::to_string(ijk[0]) + "," + std::to_string(ijk[1]);
        if (g.dim == 3) out += "," + std::to_string(ijk[2]);
        out += m.at(c) ? ",1\n" : ",0\n";
    }
    return out;
}

std::string field_to_csv(const Field& f) {
    const Grid& g = *f.grid;
    std::string out = g.dim == 3 ? "i,j,k,value\n" : "i,j,value\n";
    for (std::int64_t c = 0; c < g.total; ++c) {
        const auto ijk = g.unpack(c);
        out += std::to_string(ijk[0]) + "," + std::to_string(ijk[1]);
        if (g.dim == 3) out += "," + std::to_string(ijk[2]);
        out += "," + format_real(f[c]) + "\n";
    }
    return out;
}

std::string ledger_to_csv(const std::vector<FlowState>& states) {
    std::string out = "n,t,volume,capacity,energy,certificate,fb_residual,status\n";
    for (const auto& s : states) {
        out += std::to_string(s.row.n) + "," + format_real(s.row.t) + "," +
               format_real(s.row.volume) + "," + format_real(s.row.capacity) + "," +
               format_real(s.row.energy) + "," + format_real(s.row.certificate) + "," +
               format_real(s.row.fb_residual) + "," + to_string(s.row.status) + "\n";
    }
    return out;
}

std::string trace_to_csv(const std::vector<BoundarySample>& samples, int dim,
                         const std::string& value_name) {
    std::string out = dim == 3 ? "x,y,z," : "x,y,";
    out += value_name + "\n";
    for (const auto& s : samples) {
        out += format_real(s.point[0]) + "," + format_real(s.point[1]);
        if (dim == 3) out += "," + format_real(s.point[2]);
        out += "," + format_real(s.value) + "\n";
    }
    return out;
}

}  // namespace bflow
