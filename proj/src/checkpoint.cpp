#include "sfd/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sfd {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ", ";
        out << fmt(v[i]);
    }
    out << ']';
}

void write_ints(std::ostream& out, const std::vector<int>& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ", ";
        out << v[i];
    }
    out << ']';
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

template <typename T>
T require(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw SchemaViolation(std::string("missing field: ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaViolation(std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace

void save_bundle(const ModelBundle& bundle, const std::string& path) {
    bundle.validate();
    std::ostringstream out;
    out << "{\n";
    out << "  \"format_version\": " << kFormatVersion << ",\n";
    out << "  \"kind\": \"" << bundle_kind_name(bundle.kind) << "\",\n";
    out << "  \"T\": " << bundle.schedule.T << ",\n";
    out << "  \"alpha\": ";
    write_doubles(out, bundle.schedule.alpha);
    out << ",\n  \"phi\": ";
    write_ints(out, bundle.phi.phi);
    out << ",\n  \"net\": {\n";
    out << "    \"input_dim\": " << bundle.net.input_dim << ",\n";
    out << "    \"time_embed_dim\": " << bundle.net.time_embed_dim << ",\n";
    out << "    \"hidden_widths\": ";
    write_ints(out, bundle.net.hidden_widths);
    out << ",\n    \"activation\": \"" << activation_name(bundle.net.activation) << "\",\n";
    out << "    \"layers\": [\n";
    for (std::size_t l = 0; l < bundle.net.layers.size(); ++l) {
        const Layer& layer = bundle.net.layers[l];
        out << "      {\"w\": ";
        write_doubles(out, layer.w.data);
        out << ", \"b\": ";
        write_doubles(out, layer.b);
        out << '}' << (l + 1 < bundle.net.layers.size() ? ",\n" : "\n");
    }
    out << "    ]\n  },\n";
    out << "  \"metadata\": {";
    bool first = true;
    for (const auto& [k, v] : bundle.metadata) {
        if (!first) out << ", ";
        first = false;
        out << '"' << escape(k) << "\": \"" << escape(v) << '"';
    }
    out << "}\n}\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << out.str();
    if (!f) throw IoError("write failed: " + path);
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }

    int version = require<int>(j, "format_version");
    if (version != kFormatVersion)
        throw VersionMismatch(path + ": format_version " + std::to_string(version) +
                              " unsupported, expected " + std::to_string(kFormatVersion));

    ModelBundle b;
    b.kind = bundle_kind_from_name(require<std::string>(j, "kind"));
    b.schedule.T = require<int>(j, "T");
    b.schedule.alpha = require<std::vector<double>>(j, "alpha");
    b.phi.phi = require<std::vector<int>>(j, "phi");

    if (!j.contains("net") || !j.at("net").is_object()) throw SchemaViolation("missing field: net");
    const nlohmann::json& n = j.at("net");
    b.net.input_dim = require<int>(n, "input_dim");
    b.net.time_embed_dim = require<int>(n, "time_embed_dim");
    b.net.hidden_widths = require<std::vector<int>>(n, "hidden_widths");
    b.net.activation = activation_from_name(require<std::string>(n, "activation"));
    if (!n.contains("layers") || !n.at("layers").is_array())
        throw SchemaViolation("missing field: net.layers");

    std::vector<int> dims;
    dims.push_back(b.net.input_dim + b.net.time_embed_dim);
    for (int w : b.net.hidden_widths) dims.push_back(w);
    dims.push_back(b.net.input_dim);
    const auto& layers = n.at("layers");
    if (layers.size() + 1 != dims.size())
        throw SchemaViolation("layer count " + std::to_string(layers.size()) +
                              " inconsistent with hidden_widths");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Layer layer;
        layer.w = Matrix(dims[l + 1], dims[l]);
        auto w = require<std::vector<double>>(layers[l], "w");
        if (w.size() != layer.w.data.size())
            throw SchemaViolation("layer " + std::to_string(l) + " weight size mismatch");
        layer.w.data = std::move(w);
        layer.b = require<std::vector<double>>(layers[l], "b");
        b.net.layers.push_back(std::move(layer));
    }

    b.metadata = require<std::map<std::string, std::string>>(j, "metadata");

    try {
        b.validate();
    } catch (const InvalidParameter& e) {
        throw SchemaViolation(path + ": invariant breach on load: " + e.what());
    }
    return b;
}

}  // namespace sfd
