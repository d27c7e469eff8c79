#include "bolw/model_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "bolw/errors.hpp"

namespace bolw {

namespace {

constexpr char kMagic[8] = {'B', 'O', 'L', 'W', 'M', 'O', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.write(buf, 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.write(buf, 8);
}

std::uint32_t get_u32(std::ifstream& in) {
    char buf[4];
    in.read(buf, 4);
    std::uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
}

std::uint64_t get_u64(std::ifstream& in) {
    char buf[8];
    in.read(buf, 8);
    std::uint64_t v;
    std::memcpy(&v, buf, 8);
    return v;
}

void put_doubles(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_doubles(std::ifstream& in, std::vector<double>& v, std::size_t count) {
    v.resize(count);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
}

} // namespace

void save_model(const TopicModel& model, const std::filesystem::path& path) {
    nlohmann::json header;
    header["version"] = kVersion;
    header["k"] = model.config.k;
    header["m"] = model.phi.cols;
    header["n"] = model.theta.rows;
    header["alpha"] = model.config.alpha;
    header["beta"] = model.config.beta;
    header["seed"] = model.config.seed;
    header["vocab_hash"] = model.vocab_hash;
    header["elbo_len"] = model.elbo_trace.size();
    header["vb"] = {{"batch_size", model.config.vb.batch_size},
                    {"kappa", model.config.vb.kappa},
                    {"tau0", model.config.vb.tau0},
                    {"passes", model.config.vb.passes},
                    {"doc_update_iters", model.config.vb.doc_update_iters},
                    {"doc_convergence_tol", model.config.vb.doc_convergence_tol},
                    {"unit_learning_rate", model.config.vb.unit_learning_rate}};
    header["gibbs"] = {{"iterations", model.config.gibbs.iterations},
                       {"burn_in", model.config.gibbs.burn_in}};
    const std::string header_bytes = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out.write(kMagic, sizeof kMagic);
    put_u32(out, kVersion);
    put_u64(out, header_bytes.size());
    out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
    put_doubles(out, model.phi.data);
    put_doubles(out, model.theta.data);
    put_doubles(out, model.elbo_trace);
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

TopicModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::file_not_found, "cannot open " + path.string());

    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw Error(Errc::malformed_record, path.string() + ": not a model file");
    const std::uint32_t version = get_u32(in);
    if (version != kVersion)
        throw Error(Errc::malformed_record,
                    path.string() + ": unsupported model version " + std::to_string(version));
    const std::uint64_t header_len = get_u64(in);
    std::string header_bytes(header_len, '\0');
    in.read(header_bytes.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw Error(Errc::malformed_record, path.string() + ": truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_bytes);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_record, path.string() + ": bad header: " + e.what());
    }

    TopicModel model;
    try {
        model.config.k = header.at("k").get<std::size_t>();
        model.config.alpha = header.at("alpha").get<double>();
        model.config.beta = header.at("beta").get<double>();
        model.config.seed = header.at("seed").get<std::uint64_t>();
        model.vocab_hash = header.at("vocab_hash").get<std::uint64_t>();
        const auto& vb = header.at("vb");
        model.config.vb.batch_size = vb.at("batch_size").get<std::size_t>();
        model.config.vb.kappa = vb.at("kappa").get<double>();
        model.config.vb.tau0 = vb.at("tau0").get<double>();
        model.config.vb.passes = vb.at("passes").get<std::size_t>();
        model.config.vb.doc_update_iters = vb.at("doc_update_iters").get<std::size_t>();
        model.config.vb.doc_convergence_tol = vb.at("doc_convergence_tol").get<double>();
        model.config.vb.unit_learning_rate = vb.at("unit_learning_rate").get<bool>();
        const auto& gibbs = header.at("gibbs");
        model.config.gibbs.iterations = gibbs.at("iterations").get<std::size_t>();
        model.config.gibbs.burn_in = gibbs.at("burn_in").get<std::size_t>();

        const std::size_t m = header.at("m").get<std::size_t>();
        const std::size_t n = header.at("n").get<std::size_t>();
        const std::size_t elbo_len = header.at("elbo_len").get<std::size_t>();
        model.phi = Dense(model.config.k, m);
        model.theta = Dense(n, model.config.k);
        get_doubles(in, model.phi.data, model.config.k * m);
        get_doubles(in, model.theta.data, n * model.config.k);
        get_doubles(in, model.elbo_trace, elbo_len);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_record, path.string() + ": bad header field: " + e.what());
    }
    if (!in) throw Error(Errc::malformed_record, path.string() + ": truncated tables");
    return model;
}

} // namespace bolw
