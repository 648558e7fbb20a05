#include "text.hpp"

#include <fstream>
#include <sstream>

#include "error.hpp"

namespace mosto {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mosto
