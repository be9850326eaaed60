#include "dccamon/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "payloads are little-endian; big-endian hosts are not supported");

namespace dccamon {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArtifactError("cannot write " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArtifactError("cannot read " + path.string());
    return is;
}

void write_payload(std::ofstream& os, const double* data, std::size_t count) {
    os.write(reinterpret_cast<const char*>(data),
             static_cast<std::streamsize>(count * sizeof(double)));
}

void read_payload(std::ifstream& is, double* data, std::size_t count,
                  const std::string& what) {
    is.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double))
        throw ArtifactError(what + ": truncated payload");
}

std::string read_header_line(std::ifstream& is, const std::string& what) {
    std::string line;
    if (!std::getline(is, line)) throw ArtifactError(what + ": truncated header");
    return line;
}

std::uint64_t file_fnv(const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (is) {
        is.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace

void write_tensor_stream(std::ostream& os, const Matrix& m,
                         const std::vector<std::pair<std::string, std::string>>& meta) {
    os << "dccamon-tensor v1\n";
    os << "dtype f64le\n";
    os << "shape " << m.rows() << " " << m.cols() << "\n";
    for (const auto& [k, v] : meta) os << "meta " << k << " " << v << "\n";
    os << "end\n";
    os.write(reinterpret_cast<const char*>(m.data().data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void write_tensor(const std::filesystem::path& path, const Matrix& m,
                  const std::vector<std::pair<std::string, std::string>>& meta) {
    std::ofstream os = open_out(path);
    write_tensor_stream(os, m, meta);
    if (!os) throw ArtifactError("failed while writing " + path.string());
}

Matrix read_tensor_stream(std::istream& is, const std::string& what,
                          std::map<std::string, std::string>* meta) {
    std::string line;
    if (!std::getline(is, line)) throw ArtifactError(what + ": truncated header");
    if (line != "dccamon-tensor v1") throw ArtifactError(what + ": bad magic");
    int rows = -1, cols = -1;
    while (true) {
        if (!std::getline(is, line)) throw ArtifactError(what + ": truncated header");
        if (line == "end") break;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "dtype") {
            std::string dtype;
            ls >> dtype;
            if (dtype != "f64le") throw ArtifactError(what + ": unsupported dtype " + dtype);
        } else if (tag == "shape") {
            ls >> rows >> cols;
        } else if (tag == "meta") {
            std::string key, value;
            ls >> key;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            if (meta) (*meta)[key] = value;
        } else {
            throw ArtifactError(what + ": unknown header tag " + tag);
        }
    }
    if (rows < 0 || cols < 0) throw ArtifactError(what + ": missing shape");
    Matrix m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data().data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != m.size() * sizeof(double))
        throw ArtifactError(what + ": truncated payload");
    if (!m.all_finite()) throw ArtifactError(what + ": non-finite entries");
    return m;
}

Matrix read_tensor(const std::filesystem::path& path,
                   std::map<std::string, std::string>* meta) {
    std::ifstream is = open_in(path);
    return read_tensor_stream(is, "tensor " + path.string(), meta);
}

void save_mlp(const std::filesystem::path& path, const Mlp& net) {
    std::ofstream os = open_out(path);
    os << "dccamon-mlp v1\n";
    os << "widths";
    for (int w : net.widths()) os << " " << w;
    os << "\n";
    os << "activation relu-hidden identity-output\n";
    os << "params " << net.param_count() << "\n";
    os << "end\n";
    for (int l = 0; l < net.layer_count(); ++l) {
        write_payload(os, net.weights()[l].data().data(), net.weights()[l].size());
        write_payload(os, net.biases()[l].data(), net.biases()[l].size());
    }
    if (!os) throw ArtifactError("failed while writing " + path.string());
}

Mlp load_mlp(const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    const std::string what = "mlp " + path.string();
    if (read_header_line(is, what) != "dccamon-mlp v1")
        throw ArtifactError(what + ": bad magic");
    std::vector<int> widths;
    std::size_t declared_params = 0;
    while (true) {
        const std::string line = read_header_line(is, what);
        if (line == "end") break;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "widths") {
            int w;
            while (ls >> w) widths.push_back(w);
        } else if (tag == "activation") {
            // single supported scheme, informational
        } else if (tag == "params") {
            ls >> declared_params;
        } else {
            throw ArtifactError(what + ": unknown header tag " + tag);
        }
    }
    if (widths.size() < 2) throw ArtifactError(what + ": missing widths");
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        Matrix w(widths[l + 1], widths[l]);
        read_payload(is, w.data().data(), w.size(), what);
        std::vector<double> b(widths[l + 1]);
        read_payload(is, b.data(), b.size(), what);
        weights.push_back(std::move(w));
        biases.push_back(std::move(b));
    }
    Mlp net(widths, std::move(weights), std::move(biases));
    if (declared_params != 0 && declared_params != net.param_count())
        throw ArtifactError(what + ": parameter count mismatch");
    return net;
}

void write_pbm(const std::filesystem::path& path, const std::uint8_t* pixels, int side) {
    std::ofstream os = open_out(path);
    os << "P4\n" << side << " " << side << "\n";
    const int row_bytes = (side + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (int r = 0; r < side; ++r) {
        std::fill(row.begin(), row.end(), 0);
        for (int c = 0; c < side; ++c)
            if (pixels[r * side + c]) row[c / 8] |= static_cast<unsigned char>(0x80 >> (c % 8));
        os.write(reinterpret_cast<const char*>(row.data()), row_bytes);
    }
    if (!os) throw ArtifactError("failed while writing " + path.string());
}

std::vector<std::uint8_t> read_pbm(const std::filesystem::path& path, int& side) {
    std::ifstream is = open_in(path);
    const std::string what = "pbm " + path.string();
    std::string magic;
    is >> magic;
    if (magic != "P4") throw ArtifactError(what + ": not a binary pbm");
    int w = 0, h = 0;
    is >> w >> h;
    is.get();  // the single whitespace before the raster
    if (w != h || w <= 0) throw ArtifactError(what + ": expected a square raster");
    side = w;
    const int row_bytes = (w + 7) / 8;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h, 0);
    std::vector<char> row(row_bytes);
    for (int r = 0; r < h; ++r) {
        is.read(row.data(), row_bytes);
        if (is.gcount() != row_bytes) throw ArtifactError(what + ": truncated raster");
        for (int c = 0; c < w; ++c)
            out[static_cast<std::size_t>(r) * w + c] =
                (static_cast<unsigned char>(row[c / 8]) >> (7 - c % 8)) & 1;
    }
    return out;
}

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ArtifactError("cannot read config " + path.string());
    std::stringstream buffer;
    buffer << is.rdbuf();
    return parse_text(buffer.str(), path.string());
}

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& name) {
    ConfigFile file;
    file.name_ = name;
    std::istringstream is(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        std::string body = line.substr(first, last - first + 1);
        if (body.front() == '#' || body.front() == ';') continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ConfigError(name + ":" + std::to_string(line_no) +
                                  ": unterminated section header");
            section = body.substr(1, body.size() - 2);
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name + ":" + std::to_string(line_no) +
                              ": expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        file.index_[key] = file.entries_.size();
        file.entries_.push_back({key, value, line_no});
    }
    return file;
}

bool ConfigFile::has(const std::string& key) const { return index_.count(key) > 0; }

void ConfigFile::fail(const std::string& key, const std::string& what) const {
    const auto it = index_.find(key);
    const int line = it == index_.end() ? 0 : entries_[it->second].line;
    throw ConfigError(name_ + ":" + std::to_string(line) + ": " + key + ": " + what);
}

std::string ConfigFile::get_string(const std::string& key) const {
    const auto it = index_.find(key);
    if (it == index_.end())
        throw ConfigError(name_ + ": missing required key '" + key + "'");
    return entries_[it->second].value;
}

std::string ConfigFile::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

int ConfigFile::get_int(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        fail(key, "expected an integer, got '" + v + "'");
    }
}

double ConfigFile::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        fail(key, "expected a number, got '" + v + "'");
    }
}

std::uint64_t ConfigFile::get_u64(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const std::uint64_t out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        fail(key, "expected an unsigned integer, got '" + v + "'");
    }
}

namespace {

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : v) {
        if (c == ',' || c == ' ') {
            if (!cur.empty()) parts.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) parts.push_back(std::move(cur));
    return parts;
}

}  // namespace

std::vector<double> ConfigFile::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& part : split_list(get_string(key))) {
        try {
            out.push_back(std::stod(part));
        } catch (const std::exception&) {
            fail(key, "expected a number list, got '" + part + "'");
        }
    }
    return out;
}

std::vector<int> ConfigFile::get_ints(const std::string& key) const {
    std::vector<int> out;
    for (const std::string& part : split_list(get_string(key))) {
        try {
            out.push_back(std::stoi(part));
        } catch (const std::exception&) {
            fail(key, "expected an integer list, got '" + part + "'");
        }
    }
    return out;
}

std::string canonical_hash(std::vector<std::pair<std::string, std::string>> kv) {
    std::sort(kv.begin(), kv.end());
    std::string text;
    for (const auto& [k, v] : kv) {
        text += k;
        text += '=';
        text += v;
        text += '\n';
    }
    return hash_hex(fnv1a64(text));
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    return os.str();
}

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    return os.str();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> sim_config_to_kv(const SimConfig& c) {
    std::ostringstream theta, lb, ub, delta, train_frac, ae_lr;
    theta << c.theta;
    lb << c.pinhole_radius_lb;
    ub << c.pinhole_radius_ub;
    delta << c.delta;
    train_frac << c.train_fraction;
    ae_lr << c.ae_learning_rate;
    return {
        {"n_samples", std::to_string(c.n_samples)},
        {"theta", theta.str()},
        {"d0", std::to_string(c.d0)},
        {"pinhole_max_count", std::to_string(c.pinhole_max_count)},
        {"pinhole_radius_lb", lb.str()},
        {"pinhole_radius_ub", ub.str()},
        {"crack_max_count", std::to_string(c.crack_max_count)},
        {"crack_max_thickness", std::to_string(c.crack_max_thickness)},
        {"h", std::to_string(c.h)},
        {"h1", std::to_string(c.h1)},
        {"h2", std::to_string(c.h2)},
        {"betas", join_doubles(c.betas)},
        {"sigmas", join_doubles(c.sigmas)},
        {"delta", delta.str()},
        {"seed", std::to_string(c.seed)},
        {"test_count", std::to_string(c.test_count)},
        {"train_fraction", train_frac.str()},
        {"ae_epochs", std::to_string(c.ae_epochs)},
        {"ae_learning_rate", ae_lr.str()},
        {"ae_hidden", join_ints(c.ae_hidden)},
    };
}

SimConfig sim_config_from(const ConfigFile& file, const std::string& section) {
    SimConfig c;
    const std::string s = section.empty() ? "" : section + ".";
    auto opt_int = [&](const char* key, int& slot) {
        if (file.has(s + key)) slot = file.get_int(s + key);
    };
    auto opt_double = [&](const char* key, double& slot) {
        if (file.has(s + key)) slot = file.get_double(s + key);
    };
    opt_int("n_samples", c.n_samples);
    opt_double("theta", c.theta);
    opt_int("d0", c.d0);
    opt_int("pinhole_max_count", c.pinhole_max_count);
    opt_double("pinhole_radius_lb", c.pinhole_radius_lb);
    opt_double("pinhole_radius_ub", c.pinhole_radius_ub);
    opt_int("crack_max_count", c.crack_max_count);
    opt_int("crack_max_thickness", c.crack_max_thickness);
    opt_int("h", c.h);
    opt_int("h1", c.h1);
    opt_int("h2", c.h2);
    if (file.has(s + "betas")) c.betas = file.get_doubles(s + "betas");
    if (file.has(s + "sigmas")) c.sigmas = file.get_doubles(s + "sigmas");
    opt_double("delta", c.delta);
    if (file.has(s + "seed")) c.seed = file.get_u64(s + "seed");
    opt_int("test_count", c.test_count);
    opt_double("train_fraction", c.train_fraction);
    opt_int("ae_epochs", c.ae_epochs);
    opt_double("ae_learning_rate", c.ae_learning_rate);
    if (file.has(s + "ae_hidden")) c.ae_hidden = file.get_ints(s + "ae_hidden");
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(file.name() + ": " + e.what());
    }
    return c;
}

std::string sim_config_hash(const SimConfig& config) {
    return canonical_hash(sim_config_to_kv(config));
}

namespace {

std::string indices_line(const std::vector<int>& idx) {
    std::ostringstream os;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) os << " ";
        os << idx[i];
    }
    return os.str();
}

std::vector<int> parse_indices(const std::string& line) {
    std::istringstream is(line);
    std::vector<int> out;
    int v;
    while (is >> v) out.push_back(v);
    return out;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const SimDataset& dataset) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");
    const std::string hash = sim_config_hash(dataset.config);

    write_tensor(dir / "signals.tns", dataset.signals,
                 {{"seed", std::to_string(dataset.config.seed)}, {"config_hash", hash}});
    write_tensor(dir / "u.tns", dataset.u, {{"config_hash", hash}});
    write_tensor(dir / "v.tns", dataset.v, {{"config_hash", hash}});

    {
        std::ofstream labels = open_out(dir / "labels.txt");
        for (int l : dataset.labels) labels << l << "\n";
    }
    {
        std::ofstream splits = open_out(dir / "splits.txt");
        splits << "train " << indices_line(dataset.train_indices) << "\n";
        splits << "val " << indices_line(dataset.val_indices) << "\n";
        splits << "test " << indices_line(dataset.test_indices) << "\n";
    }

    const std::size_t px = static_cast<std::size_t>(dataset.config.d0) * dataset.config.d0;
    {
        std::ofstream im = open_out(dir / "images" / "manifest.txt");
        im << "count " << dataset.labels.size() << " side " << dataset.config.d0 << "\n";
        for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "img_%06zu.pbm", i);
            write_pbm(dir / "images" / name, dataset.images.data() + px * i,
                      dataset.config.d0);
            im << name << " " << dataset.labels[i] << "\n";
        }
    }

    std::ostringstream manifest;
    manifest << "[dataset]\n";
    manifest << "format = dccamon-dataset v1\n";
    manifest << "config_hash = " << hash << "\n";
    manifest << "samples = " << dataset.labels.size() << "\n";
    manifest << "[config]\n";
    for (const auto& [k, v] : sim_config_to_kv(dataset.config))
        manifest << k << " = " << v << "\n";
    manifest << "[files]\n";
    for (const char* f : {"signals.tns", "u.tns", "v.tns", "labels.txt", "splits.txt"})
        manifest << f << " = " << hash_hex(file_fnv(dir / f)) << "\n";
    std::ofstream mf = open_out(dir / "manifest.cfg");
    mf << manifest.str();
}

SimDataset read_dataset(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::exists(dir / "manifest.cfg"))
        throw ArtifactError("dataset manifest missing in " + dir.string());
    const ConfigFile manifest = ConfigFile::parse_file(dir / "manifest.cfg");
    if (manifest.get_or("dataset.format", "") != "dccamon-dataset v1")
        throw ArtifactError("unrecognized dataset format in " + dir.string());

    SimDataset ds;
    ds.config = sim_config_from(manifest, "config");
    const std::string expected_hash = manifest.get_string("dataset.config_hash");
    if (sim_config_hash(ds.config) != expected_hash)
        throw ArtifactError(dir.string() + ": config hash mismatch, refusing partial artifact");
    for (const char* f : {"signals.tns", "u.tns", "v.tns", "labels.txt", "splits.txt"}) {
        const std::string key = std::string("files.") + f;
        if (!fs::exists(dir / f)) throw ArtifactError(dir.string() + ": missing " + f);
        if (manifest.has(key) &&
            manifest.get_string(key) != hash_hex(file_fnv(dir / f)))
            throw ArtifactError(dir.string() + ": " + f +
                                " fails its manifest hash, refusing partial artifact");
    }

    ds.signals = read_tensor(dir / "signals.tns");
    ds.u = read_tensor(dir / "u.tns");
    ds.v = read_tensor(dir / "v.tns");

    {
        std::ifstream labels = open_in(dir / "labels.txt");
        int v;
        while (labels >> v) ds.labels.push_back(v);
    }
    {
        std::ifstream splits = open_in(dir / "splits.txt");
        std::string line;
        while (std::getline(splits, line)) {
            std::istringstream ls(line);
            std::string tag;
            ls >> tag;
            std::string rest;
            std::getline(ls, rest);
            if (tag == "train")
                ds.train_indices = parse_indices(rest);
            else if (tag == "val")
                ds.val_indices = parse_indices(rest);
            else if (tag == "test")
                ds.test_indices = parse_indices(rest);
        }
    }

    // image manifest is positional text, parse it directly
    std::ifstream im = open_in(dir / "images" / "manifest.txt");
    std::string head;
    std::getline(im, head);
    std::istringstream hs(head);
    std::string tag;
    std::size_t count = 0;
    int side = 0;
    hs >> tag >> count;
    hs >> tag >> side;
    if (count != ds.labels.size() || side != ds.config.d0)
        throw ArtifactError(dir.string() + ": image manifest disagrees with labels/config");
    const std::size_t px = static_cast<std::size_t>(side) * side;
    ds.images.assign(px * count, 0);
    std::string line;
    std::size_t idx = 0;
    while (std::getline(im, line) && idx < count) {
        std::istringstream ls(line);
        std::string name;
        int label;
        ls >> name >> label;
        int file_side = 0;
        const auto img = read_pbm(dir / "images" / name, file_side);
        if (file_side != side) throw ArtifactError(dir.string() + ": inconsistent image side");
        std::copy(img.begin(), img.end(), ds.images.begin() + px * idx);
        if (label != ds.labels[idx])
            throw ArtifactError(dir.string() + ": image manifest label mismatch");
        ++idx;
    }
    if (idx != count) throw ArtifactError(dir.string() + ": image manifest truncated");
    return ds;
}

void save_monitor_model(const std::filesystem::path& dir, const MonitorModel& model,
                        const std::string& dataset_hash) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_mlp(dir / "f.mlp", model.encoders.f);
    save_mlp(dir / "g.mlp", model.encoders.g);
    write_tensor(dir / "x0.tns", model.library.x0);
    write_tensor(dir / "y0.tns", model.library.y0);

    std::ostringstream cfg;
    cfg << "[model]\n";
    cfg << "format = dccamon-model v1\n";
    cfg << "p = " << model.encoders.p << "\n";
    cfg << "window_size = " << model.window_size << "\n";
    cfg << "ridge_rel = " << model.ridge_rel << "\n";
    cfg << "alpha = " << model.alpha << "\n";
    cfg << "tau = ";
    cfg.precision(17);
    cfg << model.tau << "\n";
    cfg.precision(6);
    cfg << "calibrated = " << (model.calibrated ? 1 : 0) << "\n";
    cfg << "distance = "
        << (model.library.distance == DistanceKind::standardized_euclidean ? "standardized"
                                                                           : "feature")
        << "\n";
    cfg << "dataset_hash = " << dataset_hash << "\n";
    cfg << "[train]\n";
    cfg << "epochs = " << model.encoders.config.epochs << "\n";
    cfg << "learning_rate = " << model.encoders.config.learning_rate << "\n";
    cfg << "beta = " << model.encoders.config.beta << "\n";
    cfg << "seed = " << model.encoders.config.seed << "\n";
    cfg << "[files]\n";
    for (const char* f : {"f.mlp", "g.mlp", "x0.tns", "y0.tns"})
        cfg << f << " = " << hash_hex(file_fnv(dir / f)) << "\n";
    std::ofstream os = open_out(dir / "model.cfg");
    os << cfg.str();
}

StoredModel load_monitor_model(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::exists(dir / "model.cfg"))
        throw ArtifactError("model sidecar missing in " + dir.string());
    const ConfigFile cfg = ConfigFile::parse_file(dir / "model.cfg");
    if (cfg.get_or("model.format", "") != "dccamon-model v1")
        throw ArtifactError("unrecognized model format in " + dir.string());
    for (const char* f : {"f.mlp", "g.mlp", "x0.tns", "y0.tns"}) {
        if (!fs::exists(dir / f)) throw ArtifactError(dir.string() + ": missing " + f);
        const std::string key = std::string("files.") + f;
        if (cfg.has(key) && cfg.get_string(key) != hash_hex(file_fnv(dir / f)))
            throw ArtifactError(dir.string() + ": " + f +
                                " fails its manifest hash, refusing partial artifact");
    }

    StoredModel stored;
    stored.dataset_hash = cfg.get_or("model.dataset_hash", "");

    EncoderPair pair;
    pair.f = load_mlp(dir / "f.mlp");
    pair.g = load_mlp(dir / "g.mlp");
    pair.p = cfg.get_int("model.p");
    pair.config.epochs = cfg.has("train.epochs") ? cfg.get_int("train.epochs") : 0;
    if (cfg.has("train.learning_rate"))
        pair.config.learning_rate = cfg.get_double("train.learning_rate");
    if (cfg.has("train.beta")) pair.config.beta = cfg.get_double("train.beta");
    if (cfg.has("train.seed")) pair.config.seed = cfg.get_u64("train.seed");
    pair.config.dim = pair.p;
    pair.config.window_size = cfg.get_int("model.window_size");

    const Matrix x0 = read_tensor(dir / "x0.tns");
    const Matrix y0 = read_tensor(dir / "y0.tns");
    const DistanceKind kind = cfg.get_or("model.distance", "standardized") == "feature"
                                  ? DistanceKind::feature_euclidean
                                  : DistanceKind::standardized_euclidean;

    stored.model = make_monitor_model(std::move(pair), x0, y0, kind,
                                      cfg.get_double("model.ridge_rel"),
                                      cfg.get_int("model.window_size"));
    stored.model.alpha = cfg.get_double("model.alpha");
    stored.model.tau = cfg.get_double("model.tau");
    stored.model.calibrated = cfg.get_int("model.calibrated") != 0;
    return stored;
}

}  // namespace dccamon
