#include "cdc/byte_io.hpp"

#include <fstream>
#include <iterator>

namespace cdc {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoFailure, "cannot open '" + path + "' for reading");
    }
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(Errc::IoFailure, "read error on '" + path + "'");
    }
    return data;
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::IoFailure, "cannot open '" + path + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
        throw Error(Errc::IoFailure, "write error on '" + path + "'");
    }
}

}  // namespace cdc
