#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "wsc/error.hpp"

namespace wsc {

// Little-endian binary primitives for the model/net/pattern file formats.

void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_i32(std::ostream& os, std::int32_t v);
void write_f64(std::ostream& os, double v);

std::uint8_t read_u8(std::istream& is);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
std::int32_t read_i32(std::istream& is);
double read_f64(std::istream& is);

std::ofstream open_out(const std::string& path);
std::ifstream open_in(const std::string& path);

// Shortest representation that parses back to the same double ("%.17g"
// fallback); used by every CSV writer so emitted values re-read exactly.
std::string format_double(double v);

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

std::uint64_t fnv1a64_bytes(const std::string& bytes);

}  // namespace wsc
