#include "plnav/nn/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "plnav/error.hpp"

namespace plnav::nn {

namespace {

constexpr std::string_view kMagic = "PLNAVCKP";

void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint64_t u64() { return read_le(8); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(read_le(4)); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string_view raw(std::size_t n)
    {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t position() const noexcept { return pos_; }

private:
    void need(std::size_t n) const
    {
        if (bytes_.size() - pos_ < n)
            throw IoError("checkpoint truncated at byte " + std::to_string(pos_));
    }
    std::uint64_t read_le(int n)
    {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::int64_t> config_block(const PolicyConfig& c)
{
    return {c.scan_width,    c.conv1_filters, c.conv1_kernel,        c.conv1_stride,
            c.conv2_filters, c.conv2_kernel,  c.conv2_stride,        c.attention_reduction,
            c.attention_merge == AttentionMerge::Max ? 1 : 0,        c.feature_dim,
            c.hidden_dim};
}

PolicyConfig config_from_block(const std::vector<std::int64_t>& d)
{
    if (d.size() != 11)
        throw IoError("checkpoint config block has " + std::to_string(d.size()) + " entries, expected 11");
    PolicyConfig c;
    c.scan_width = static_cast<int>(d[0]);
    c.conv1_filters = static_cast<int>(d[1]);
    c.conv1_kernel = static_cast<int>(d[2]);
    c.conv1_stride = static_cast<int>(d[3]);
    c.conv2_filters = static_cast<int>(d[4]);
    c.conv2_kernel = static_cast<int>(d[5]);
    c.conv2_stride = static_cast<int>(d[6]);
    c.attention_reduction = static_cast<int>(d[7]);
    c.attention_merge = d[8] == 1 ? AttentionMerge::Max : AttentionMerge::Add;
    c.feature_dim = static_cast<int>(d[9]);
    c.hidden_dim = static_cast<int>(d[10]);
    return c;
}

} // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept
{
    std::uint64_t h = seed;
    for (char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

const Tensor* Checkpoint::find(std::string_view name) const noexcept
{
    for (const auto& t : tensors)
        if (t.name == name)
            return &t.tensor;
    return nullptr;
}

double Checkpoint::meta(std::string_view key, double fallback) const noexcept
{
    const Tensor* t = find("meta." + std::string(key));
    return t && t->size() == 1 ? (*t)[0] : fallback;
}

void Checkpoint::set_meta(const std::string& key, double value)
{
    const std::string name = "meta." + key;
    for (auto& t : tensors)
        if (t.name == name) {
            t.tensor = Tensor({1}, value);
            return;
        }
    tensors.push_back({name, Tensor({1}, value)});
}

std::string serialize_checkpoint(const Checkpoint& ckpt)
{
    std::string out(kMagic);
    put_u32(out, kCheckpointVersion);
    const auto dims = config_block(ckpt.policy);
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (std::int64_t d : dims)
        put_u64(out, static_cast<std::uint64_t>(d));
    put_u64(out, ckpt.config_hash);
    put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, tensor] : ckpt.tensors) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put_u32(out, static_cast<std::uint32_t>(tensor.shape().size()));
        for (std::size_t s : tensor.shape())
            put_u64(out, s);
        for (double v : tensor.data())
            put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    put_u64(out, fnv1a64(out));
    return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes)
{
    if (bytes.size() < kMagic.size() + 8 || bytes.substr(0, kMagic.size()) != kMagic)
        throw IoError("not a checkpoint file (bad magic)");
    const std::string_view body = bytes.substr(0, bytes.size() - 8);
    Reader tail(bytes.substr(bytes.size() - 8));
    if (tail.u64() != fnv1a64(body))
        throw IoError("checkpoint checksum mismatch");

    Reader r(body);
    r.raw(kMagic.size());
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    std::vector<std::int64_t> dims(r.u32());
    for (auto& d : dims)
        d = static_cast<std::int64_t>(r.u64());

    Checkpoint ckpt;
    ckpt.policy = config_from_block(dims);
    ckpt.config_hash = r.u64();
    const std::uint32_t count = r.u32();
    for (std::uint32_t k = 0; k < count; ++k) {
        NamedTensor nt;
        nt.name = std::string(r.raw(r.u32()));
        std::vector<std::size_t> shape(r.u32());
        for (auto& s : shape)
            s = r.u64();
        nt.tensor = Tensor(std::move(shape));
        for (double& v : nt.tensor.data())
            v = r.f64();
        ckpt.tensors.push_back(std::move(nt));
    }
    if (r.position() != body.size())
        throw IoError("checkpoint has trailing bytes");
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt)
{
    const std::string bytes = serialize_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open checkpoint " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return deserialize_checkpoint(bytes);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

Checkpoint make_checkpoint(const PolicyNet& net, std::uint64_t config_hash, const Adam* optimizer)
{
    Checkpoint ckpt;
    ckpt.policy = net.config();
    ckpt.config_hash = config_hash;
    const ParameterStore& store = net.params();
    for (const Parameter& p : store.params())
        ckpt.tensors.push_back({p.name, p.value});
    if (optimizer) {
        for (std::size_t k = 0; k < store.size(); ++k) {
            ckpt.tensors.push_back({"adam.m." + store[k].name, optimizer->first_moments()[k]});
            ckpt.tensors.push_back({"adam.v." + store[k].name, optimizer->second_moments()[k]});
        }
        ckpt.set_meta("adam.steps", static_cast<double>(optimizer->steps()));
    }
    return ckpt;
}

PolicyNet restore_policy(const Checkpoint& ckpt)
{
    PolicyNet net = PolicyNet::zeros(ckpt.policy);
    ParameterStore& store = net.params();
    for (std::size_t k = 0; k < store.size(); ++k) {
        const Tensor* t = ckpt.find(store[k].name);
        if (!t)
            throw IoError("checkpoint lacks parameter " + store[k].name);
        if (t->shape() != store[k].value.shape())
            throw ShapeError("checkpoint parameter " + store[k].name + " has incompatible shape");
        store[k].value = *t;
    }
    return net;
}

bool restore_optimizer(const Checkpoint& ckpt, Adam& optimizer)
{
    const double steps = ckpt.meta("adam.steps", -1.0);
    if (steps < 0.0)
        return false;
    auto& m = optimizer.first_moments();
    auto& v = optimizer.second_moments();
    std::size_t k = 0;
    for (const auto& nt : ckpt.tensors) {
        if (nt.name.starts_with("adam.m.")) {
            if (k >= m.size() || nt.tensor.shape() != m[k].shape())
                throw ShapeError("checkpoint optimizer state does not match the network");
            m[k] = nt.tensor;
        } else if (nt.name.starts_with("adam.v.")) {
            if (k >= v.size() || nt.tensor.shape() != v[k].shape())
                throw ShapeError("checkpoint optimizer state does not match the network");
            v[k] = nt.tensor;
            ++k;
        }
    }
    if (k != m.size())
        throw IoError("checkpoint optimizer state is incomplete");
    optimizer.set_steps(static_cast<std::int64_t>(steps));
    return true;
}

} // namespace plnav::nn
