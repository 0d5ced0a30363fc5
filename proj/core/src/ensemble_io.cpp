#include <bit>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include "hypodiff/error.hpp"
#include "hypodiff/format.hpp"
#include "hypodiff/simulate.hpp"

namespace hypodiff {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  require(in.gcount() == 8, ErrorKind::SchemaMismatch, "truncated ensemble file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_binary(const PathEnsemble& e, std::ostream& out) {
  put_u64(out, static_cast<std::uint64_t>(e.d));
  put_u64(out, static_cast<std::uint64_t>(e.n_paths));
  put_u64(out, static_cast<std::uint64_t>(e.n_steps));
  put_u64(out, std::bit_cast<std::uint64_t>(e.dt));
  put_u64(out, e.seed);
  for (double v : e.states) put_u64(out, std::bit_cast<std::uint64_t>(v));
  require(static_cast<bool>(out), ErrorKind::InvalidArgument, "failed to write ensemble");
}

PathEnsemble read_binary(std::istream& in) {
  PathEnsemble e;
  const std::uint64_t d = get_u64(in);
  const std::uint64_t n_paths = get_u64(in);
  const std::uint64_t n_steps = get_u64(in);
  e.dt = std::bit_cast<double>(get_u64(in));
  e.seed = get_u64(in);
  require(d >= 1 && d < (1u << 20) && n_steps < (1ull << 31) && n_paths < (1ull << 40),
          ErrorKind::SchemaMismatch, "implausible ensemble header");
  e.d = static_cast<int>(d);
  e.n_paths = static_cast<std::size_t>(n_paths);
  e.n_steps = static_cast<int>(n_steps);
  const std::size_t count = e.n_paths * static_cast<std::size_t>(e.n_steps + 1) * e.d;
  e.states.resize(count);
  for (std::size_t i = 0; i < count; ++i) e.states[i] = std::bit_cast<double>(get_u64(in));
  e.outer_exit.resize(e.n_paths);
  return e;
}

void write_csv(const PathEnsemble& e, std::ostream& out) {
  out << "path,step,t";
  for (int i = 0; i < e.d; ++i) out << ",x" << (i + 1);
  out << '\n';
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    const PathView v = e.view(p);
    for (int k = 0; k <= e.n_steps; ++k) {
      out << p << ',' << k << ',' << format_double(v.time(k));
      const auto x = v.state(k);
      for (int i = 0; i < e.d; ++i) out << ',' << format_double(x(i));
      out << '\n';
    }
  }
}

}  // namespace hypodiff
