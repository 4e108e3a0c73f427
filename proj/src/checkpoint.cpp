// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tryonlab/error.hpp"
#include "tryonlab/harness.hpp"

namespace tryonlab {

namespace {

constexpr char kMagic[] = "TRYONCKPT1\n";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;

void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::ifstream& in, const std::string& what) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (in.gcount() != 8) raise(ErrorCode::IoFailure, "truncated checkpoint", what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_floats(std::ofstream& out, const std::vector<float>& v) {
    write_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> read_floats(std::ifstream& in, const std::string& what) {
    const std::uint64_t n = read_u64(in, what);
    std::vector<float> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (static_cast<std::uint64_t>(in.gcount()) != n * sizeof(float))
        raise(ErrorCode::IoFailure, "truncated checkpoint", what);
    return v;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    nlohmann::json header;
    header["version"] = 1;
    header["config"] = config_to_text(ckpt.config);
    header["epoch"] = ckpt.epoch;
    header["step"] = ckpt.step;
    header["adam_t"] = ckpt.adam_t;
    header["loss_scale"] = ckpt.loss_scale;
    header["good_steps"] = ckpt.good_steps;
    header["rng"] = ckpt.rng_state;
    nlohmann::json layout = nlohmann::json::array();
    for (const auto& [name, count] : ckpt.layout) layout.push_back({name, count});
    header["layout"] = layout;
    const std::string text = header.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoFailure, "cannot open checkpoint for writing", path.string());
    out.write(kMagic, static_cast<std::streamsize>(kMagicLen));
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_floats(out, ckpt.params);
    write_floats(out, ckpt.m);
    write_floats(out, ckpt.v);
    out.flush();
    if (!out) raise(ErrorCode::IoFailure, "failed writing checkpoint", path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoFailure, "cannot open checkpoint", path.string());
    char magic[kMagicLen];
    in.read(magic, static_cast<std::streamsize>(kMagicLen));
    if (static_cast<std::size_t>(in.gcount()) != kMagicLen ||
        std::memcmp(magic, kMagic, kMagicLen) != 0)
        raise(ErrorCode::IoFailure, "not a checkpoint file", path.string());

    const std::uint64_t hlen = read_u64(in, "header length");
    std::string text(hlen, '\0');
    in.read(text.data(), static_cast<std::streamsize>(hlen));
    if (static_cast<std::uint64_t>(in.gcount()) != hlen)
        raise(ErrorCode::IoFailure, "truncated checkpoint", "header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::IoFailure, "corrupt checkpoint header", e.what());
    }

    Checkpoint ckpt;
    try {
        if (header.at("version").get<int>() != 1)
            raise(ErrorCode::IoFailure, "unsupported checkpoint version",
                  header.at("version").dump());
        ckpt.config = parse_config_text(header.at("config").get<std::string>());
        ckpt.epoch = header.at("epoch").get<int>();
        ckpt.step = header.at("step").get<std::int64_t>();
        ckpt.adam_t = header.at("adam_t").get<std::int64_t>();
        ckpt.loss_scale = header.at("loss_scale").get<double>();
        ckpt.good_steps = header.at("good_steps").get<int>();
        ckpt.rng_state = header.at("rng").get<std::string>();
        for (const auto& entry : header.at("layout"))
            ckpt.layout.emplace_back(entry.at(0).get<std::string>(),
                                     entry.at(1).get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::IoFailure, "corrupt checkpoint header", e.what());
    }

    ckpt.params = read_floats(in, "params");
    ckpt.m = read_floats(in, "adam m");
    ckpt.v = read_floats(in, "adam v");

    std::size_t total = 0;
    for (const auto& [name, count] : ckpt.layout) total += count;
    if (ckpt.params.size() != total || ckpt.m.size() != total || ckpt.v.size() != total)
        raise(ErrorCode::IoFailure, "checkpoint arrays disagree with layout", path.string());
    return ckpt;
}

void apply_checkpoint(const Checkpoint& ckpt, TryonNetF& net, AdamState& adam) {
    std::vector<std::pair<std::string, std::size_t>> layout;
    net.visit_params([&](const std::string& name, std::vector<float>& w, std::vector<float>&) {
        layout.emplace_back(name, w.size());
    });
    if (layout.size() != ckpt.layout.size())
        raise(ErrorCode::LayoutMismatch,
              "checkpoint has " + std::to_string(ckpt.layout.size()) + " parameter blocks, net has " +
                  std::to_string(layout.size()));
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (layout[i] != ckpt.layout[i])
            raise(ErrorCode::LayoutMismatch,
                  "parameter block mismatch at " + layout[i].first,
                  "expected " + ckpt.layout[i].first + "[" +
                      std::to_string(ckpt.layout[i].second) + "]");
    }

    std::size_t off = 0;
    net.visit_params([&](const std::string&, std::vector<float>& w, std::vector<float>&) {
        std::memcpy(w.data(), ckpt.params.data() + off, w.size() * sizeof(float));
        off += w.size();
    });
    adam.m = ckpt.m;
    adam.v = ckpt.v;
    adam.t = ckpt.adam_t;
}

} // namespace tryonlab
