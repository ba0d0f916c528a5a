// SPDX-License-Identifier: Apache-2.0
#include "morphkit/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace morphkit::ad {

namespace {

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hexfloat(const std::string &tok) {
  char *end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw CheckpointError("bad value '" + tok + "' in parameter block");
  return v;
}

} // namespace

void write_params(std::ostream &os, const ParamStore &store) {
  os << "morphkit-params " << kParamFormatVersion << '\n';
  os << "count " << store.size() << '\n';
  for (const Parameter *p : store.all()) {
    os << "param " << p->name << ' ' << p->group << ' ' << p->value.rank();
    for (std::size_t d : p->value.shape())
      os << ' ' << d;
    os << '\n';
    for (std::size_t i = 0; i < p->value.numel(); ++i)
      os << (i ? " " : "") << hexfloat(p->value[i]);
    os << '\n';
  }
}

void read_params(std::istream &is, ParamStore &store) {
  std::string line, magic;
  int version = 0;
  if (!std::getline(is, line))
    throw CheckpointError("empty parameter block");
  {
    std::istringstream hs(line);
    hs >> magic >> version;
    if (magic != "morphkit-params")
      throw CheckpointError("not a parameter block: '" + line + "'");
    if (version != kParamFormatVersion)
      throw CheckpointError("unsupported parameter format version " +
                            std::to_string(version));
  }
  std::size_t count = 0;
  {
    std::getline(is, line);
    std::istringstream cs(line);
    std::string key;
    cs >> key >> count;
    if (key != "count")
      throw CheckpointError("expected 'count' line, got '" + line + "'");
  }
  std::map<std::string, Tensor> loaded;
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(is, line))
      throw CheckpointError("truncated parameter block");
    std::istringstream ps(line);
    std::string tag, name, group;
    std::size_t rank = 0;
    ps >> tag >> name >> group >> rank;
    if (tag != "param")
      throw CheckpointError("expected 'param' line, got '" + line + "'");
    Shape shape(rank);
    for (auto &d : shape)
      ps >> d;
    if (!ps)
      throw CheckpointError("malformed header for parameter " + name);
    if (!std::getline(is, line))
      throw CheckpointError("missing values for parameter " + name);
    std::istringstream vs(line);
    std::vector<double> vals;
    std::string tok;
    while (vs >> tok)
      vals.push_back(parse_hexfloat(tok));
    if (vals.size() != shape_numel(shape))
      throw CheckpointError("parameter " + name + " has " +
                            std::to_string(vals.size()) + " values, shape " +
                            shape_str(shape) + " needs " +
                            std::to_string(shape_numel(shape)));
    loaded.emplace(name, Tensor(shape, std::move(vals)));
  }
  for (Parameter *p : store.all()) {
    auto it = loaded.find(p->name);
    if (it == loaded.end())
      throw CheckpointError("checkpoint lacks parameter " + p->name);
    if (it->second.shape() != p->value.shape())
      throw CheckpointError("parameter " + p->name + " has shape " +
                            shape_str(it->second.shape()) + ", model expects " +
                            shape_str(p->value.shape()));
    p->value = it->second;
  }
}

} // namespace morphkit::ad
