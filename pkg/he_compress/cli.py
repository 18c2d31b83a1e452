"""
Command-line interface for he-compress.

Each pipeline stage reads and writes HEC1 files:

    keygen → enc-key → encrypt → process → compress → decrypt

plus `bench` for the size tables, `serve`/`request` for the network demo and
`config` to print the effective configuration.
"""

import argparse
import logging
import random
import sys
from logging.handlers import RotatingFileHandler

from he_compress import codec
from he_compress.additive_he import ahe_keygen
from he_compress.client import expected_result, run_session
from he_compress.codec import FileKind
from he_compress.compression import (
    encrypt_lattice_key,
    lwe_compress,
    lwe_compress_batch,
    modified_decrypt,
    modified_decrypt_batch,
    rlwe_compress,
    rlwe_compress_batch,
)
from he_compress.config import get_config
from he_compress.errors import HeCompressError, IncompatibleParametersError, ParameterError
from he_compress.lwe_scheme import lwe_decrypt, lwe_encrypt, lwe_encrypt_seeded, lwe_expand_seeded, lwe_keygen, lwe_sub, lwe_weighted_sum
from he_compress.models import LatticeParams, LweParams, Polynomial, SessionConfig
from he_compress.rlwe_scheme import rlwe_decrypt, rlwe_encrypt, rlwe_encrypt_seeded, rlwe_expand_seeded, rlwe_keygen, rlwe_sub, rlwe_weighted_sum
from he_compress.server import parse_address, serve
from he_compress.sizes_bench import render_machine, render_text_table, run_benchmark

EXIT_ERROR = 1
EXIT_SETUP = 3


def _configure_logging(log_file: str) -> None:
    """Route he_compress log records to both the console and a rotating file."""
    package_logger = logging.getLogger("he_compress")
    package_logger.setLevel(logging.INFO)

    if package_logger.handlers:
        return

    formatter = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")

    file_handler = RotatingFileHandler(log_file, maxBytes=5_000_000, backupCount=3)
    file_handler.setFormatter(formatter)
    package_logger.addHandler(file_handler)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    package_logger.addHandler(console_handler)


def _rng() -> random.Random:
    return random.SystemRandom()


def _parse_weights(text: str) -> tuple[tuple[int, int], ...]:
    """'0:1,2:3' → ((0, 1), (2, 3)); a bare '1,3' means weights for inputs 0, 1, ..."""
    pairs = []
    for position, item in enumerate(part.strip() for part in text.split(",") if part.strip()):
        index, sep, weight = item.partition(":")
        try:
            pairs.append((int(index), int(weight)) if sep else (position, int(index)))
        except ValueError:
            raise ParameterError(f"invalid weight entry {item!r}") from None
    if not pairs:
        raise ParameterError("no weights given")
    return tuple(pairs)


def _parse_message(text: str, params: LatticeParams):
    """An integer for LWE; comma-separated coefficients (zero-padded to N) for RLWE."""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ParameterError(f"invalid message {text!r}") from None
    if isinstance(params, LweParams):
        if len(values) != 1:
            raise ParameterError(f"LWE messages are single integers, got {text!r}")
        return values[0]
    if len(values) > params.N:
        raise ParameterError(f"message has {len(values)} coefficients, ring has N={params.N}")
    return Polynomial(tuple(values) + (0,) * (params.N - len(values)))


def _format_plaintext(value) -> str:
    if isinstance(value, Polynomial):
        return ",".join(str(c) for c in value.coeffs)
    return str(value)


def _resolve_set(args) -> LatticeParams:
    params = get_config().parameter_set(args.set)
    if getattr(args, "scheme", None) and args.scheme != params.scheme.value:
        raise ParameterError(f"parameter set {args.set!r} is {params.scheme.value}, not {args.scheme}")
    return params


def _load_ciphertext_inputs(path: str) -> tuple[list, LatticeParams]:
    """Full ciphertexts from a ciphertext or seeded-ciphertext file."""
    data = codec.read_file(path)
    kind, _ = codec.unwrap(data)
    if kind is FileKind.SEEDED_CIPHERTEXTS:
        scts, params = codec.load_seeded(data)
        expand = lwe_expand_seeded if isinstance(params, LweParams) else rlwe_expand_seeded
        return [expand(s, params) for s in scts], params
    return codec.load_ciphertexts(data)


def cmd_keygen(args):
    """Generate a lattice secret key, and an additive keypair when asked."""
    config = get_config()
    params = _resolve_set(args)
    rng = _rng()

    sk = lwe_keygen(params, rng) if isinstance(params, LweParams) else rlwe_keygen(params, rng)
    codec.write_file(args.out, codec.dump_lattice_key(sk, params))
    print(f"Wrote {params.scheme.value} secret key for {params.label} to {args.out}")

    if args.ahe_out or args.ahe_bits:
        bits = args.ahe_bits or config.additive.key_bits
        ahe_out = args.ahe_out or "additive.key"
        print(f"Generating {bits}-bit Paillier key...")
        kp = ahe_keygen(bits, rng, config.additive.miller_rabin_rounds, config.additive.max_prime_attempts)
        codec.write_file(ahe_out, codec.dump_keypair(kp))
        codec.write_file(f"{ahe_out}.pub", codec.dump_public_key(kp.public))
        print(f"Wrote additive keypair to {ahe_out} and public key to {ahe_out}.pub")


def cmd_enc_key(args):
    """Encrypt the lattice secret key under the additive public key."""
    sk, params = codec.load_lattice_key(codec.read_file(args.key))
    data = codec.read_file(args.ahe_key)
    kind, _ = codec.unwrap(data)
    pk = codec.load_keypair(data).public if kind is FileKind.ADDITIVE_KEYPAIR else codec.load_public_key(data)

    esk = encrypt_lattice_key(pk, sk, params, _rng())
    out = codec.dump_encrypted_key(esk, params)
    codec.write_file(args.out, out)
    print(f"Wrote encrypted key ({esk.dimension} entries, {len(codec.esk_to_bytes(esk))} bytes) to {args.out}")


def cmd_encrypt(args):
    """Encrypt one or more messages."""
    sk, params = codec.load_lattice_key(codec.read_file(args.key))
    rng = _rng()
    messages = [_parse_message(text, params) for text in args.mu]

    if args.seeded:
        encrypt = lwe_encrypt_seeded if isinstance(params, LweParams) else rlwe_encrypt_seeded
        cts = [encrypt(sk, mu, params, None, rng) for mu in messages]
        data = codec.dump_seeded(cts, params)
    else:
        encrypt = lwe_encrypt if isinstance(params, LweParams) else rlwe_encrypt
        cts = [encrypt(sk, mu, params, rng) for mu in messages]
        data = codec.dump_ciphertexts(cts, params)
    codec.write_file(args.out, data)
    print(f"Wrote {len(cts)} {'seeded ' if args.seeded else ''}ciphertext(s) to {args.out}")


def cmd_process(args):
    """Evaluate a weighted sum over the input ciphertexts, minus any --subtract inputs."""
    cts, params = _load_ciphertext_inputs(args.input)
    weights = _parse_weights(args.weights)
    is_lwe = isinstance(params, LweParams)
    weighted_sum = lwe_weighted_sum if is_lwe else rlwe_weighted_sum
    subtract = lwe_sub if is_lwe else rlwe_sub
    result = weighted_sum(cts, weights, params)
    for index in args.subtract or []:
        if not 0 <= index < len(cts):
            raise ParameterError(f"input index {index} out of range for {len(cts)} ciphertexts")
        result = subtract(result, cts[index], params)
    codec.write_file(args.out, codec.dump_ciphertexts([result], params))
    print(f"Wrote weighted sum over {len(cts)} input(s) to {args.out} (noise budget {result.noise_budget_bits} bits)")


def cmd_compress(args):
    """Compress ciphertexts with the encrypted key."""
    esk, key_params = codec.load_encrypted_key(codec.read_file(args.esk))
    cts, params = _load_ciphertext_inputs(args.input)
    if params.fingerprint != key_params.fingerprint:
        raise ParameterError("encrypted key and ciphertexts use different parameters")

    if isinstance(params, LweParams):
        compressed = lwe_compress(esk, cts[0], params) if len(cts) == 1 else lwe_compress_batch(esk, cts, params)
    else:
        coeffs = args.coeff or [0]
        if not 0 <= args.index < len(cts):
            raise ParameterError(f"ciphertext index {args.index} out of range for {len(cts)} ciphertext(s)")
        ct = cts[args.index]
        compressed = rlwe_compress(esk, ct, coeffs[0], params) if len(coeffs) == 1 else rlwe_compress_batch(esk, ct, coeffs, params)

    data = codec.dump_compressed(compressed, params, esk.public_key)
    codec.write_file(args.out, data)
    print(f"Wrote compressed ciphertext ({compressed.layout.slot_count} slot(s), {esk.public_key.ciphertext_bytes} payload bytes) to {args.out}")


def cmd_decrypt(args):
    """Decrypt lattice ciphertexts (--key) or a compressed ciphertext (--ahe-key)."""
    data = codec.read_file(args.input)
    kind, _ = codec.unwrap(data)

    if kind is FileKind.COMPRESSED:
        if not args.ahe_key:
            raise ParameterError("decrypting a compressed ciphertext needs --ahe-key")
        compressed, params, pk = codec.load_compressed(data)
        kp = codec.load_keypair(codec.read_file(args.ahe_key))
        if kp.public != pk:
            raise ParameterError("additive key does not match the compressed ciphertext")
        values = [modified_decrypt(kp, compressed, params)] if compressed.layout.slot_count == 1 else modified_decrypt_batch(kp, compressed, params)
        for value in values:
            print(value)
        return

    if not args.key:
        raise ParameterError("decrypting lattice ciphertexts needs --key")
    sk, key_params = codec.load_lattice_key(codec.read_file(args.key))
    cts, params = _load_ciphertext_inputs(args.input)
    if params.fingerprint != key_params.fingerprint:
        raise ParameterError("secret key and ciphertexts use different parameters")
    decrypt = lwe_decrypt if isinstance(params, LweParams) else rlwe_decrypt
    for ct in cts:
        print(_format_plaintext(decrypt(sk, ct, params)))


def cmd_bench(args):
    """Size report (and timings) for a group of parameter sets."""
    config = get_config()
    labels = config.group(args.sets)
    ahe_bits = args.ahe_bits or config.additive.key_bits
    trials = args.trials or config.bench.trials

    report = run_benchmark(labels, ahe_bits, trials, config, timings=not args.sizes_only)
    rendered = render_machine(report) if args.format == "machine" else render_text_table(report, config.bench.kb)
    if args.out:
        codec.write_file(args.out, (rendered + "\n").encode("utf-8"))
        print(f"Wrote report for {len(report.reports)} parameter set(s) to {args.out}")
    else:
        print(rendered)


def cmd_serve(args):
    """Run the demo compression server."""
    config = get_config()
    print(f"Serving on {args.bind or f'{config.server.host}:{config.server.port}'} (Ctrl+C to stop)")
    serve(args.bind, config)


def cmd_request(args):
    """Run one session against a demo server and check it against the clear-text answer."""
    config = get_config()
    sk, params = codec.load_lattice_key(codec.read_file(args.key))
    kp = codec.load_keypair(codec.read_file(args.ahe_key))
    messages = [_parse_message(text, params) for text in args.mu]
    weights = _parse_weights(args.weights) if args.weights else tuple((i, 1) for i in range(len(messages)))
    coefficients = tuple(args.coeff or ([0] if not isinstance(params, LweParams) else []))
    session = SessionConfig(params.scheme, params.label, kp.public.bits, weights, coefficients)

    address = parse_address(args.connect or "", config.server.host, config.server.port)
    result = run_session(address, session, params, sk, kp, messages, _rng(), config=config)
    expected = expected_result(session, messages, params)

    print(f"Result: {','.join(str(v) for v in result.values)}")
    print(f"Expected: {','.join(str(v) for v in expected)}")
    print(f"Response: {result.response_wire_bytes} bytes on the wire; key uploaded: {result.uploaded_key}")
    if result.values != expected:
        print("Error: result does not match the clear-text evaluation", file=sys.stderr)
        return EXIT_ERROR
    return 0


def cmd_config(args):
    """Show current configuration."""
    config = get_config()

    print("Current Configuration:")
    print("\nParameter sets:")
    for entry in config.parameter_sets:
        dimension = f"n={entry.n}" if entry.scheme == "lwe" else f"N={entry.N}"
        print(f"  {entry.label:<10} {entry.scheme:<5} {dimension:<8} log2_q={entry.log2_q:<3} p={entry.p:<4} sigma={entry.sigma}")

    print("\nNoise:")
    print(f"  Bound: {config.noise.bound_sigmas} sigma")

    print("\nAdditive:")
    print(f"  Key bits: {config.additive.key_bits}")
    print(f"  Miller-Rabin rounds: {config.additive.miller_rabin_rounds}")

    print("\nBench:")
    for name, labels in config.bench.groups.items():
        print(f"  {name}: {', '.join(labels)}")
    print(f"  Trials: {config.bench.trials}")

    print("\nServer:")
    print(f"  Address: {config.server.host}:{config.server.port}")
    print(f"  Max frame: {config.server.max_frame_bytes} bytes")
    print(f"  Registry: {config.registry_db_path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Compress LWE/RLWE ciphertexts with an additively encrypted secret key",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # Keygen command
    keygen_parser = subparsers.add_parser("keygen", help="Generate a lattice secret key (and optionally a Paillier keypair)")
    keygen_parser.add_argument("--scheme", choices=["lwe", "rlwe"], help="Expected scheme of the parameter set")
    keygen_parser.add_argument("--set", required=True, help="Parameter-set label from the registry")
    keygen_parser.add_argument("--out", default="lattice.key", help="Lattice key output path (default: lattice.key)")
    keygen_parser.add_argument("--ahe-bits", type=int, help="Also generate a Paillier keypair of this size")
    keygen_parser.add_argument("--ahe-out", help="Paillier keypair output path (default: additive.key)")
    keygen_parser.set_defaults(func=cmd_keygen)

    # Encrypted-key command
    enc_key_parser = subparsers.add_parser("enc-key", help="Encrypt the lattice key under the additive public key")
    enc_key_parser.add_argument("--key", default="lattice.key", help="Lattice key file")
    enc_key_parser.add_argument("--ahe-key", default="additive.key", help="Additive keypair or public key file")
    enc_key_parser.add_argument("--out", default="encrypted.key", help="Output path (default: encrypted.key)")
    enc_key_parser.set_defaults(func=cmd_enc_key)

    # Encrypt command
    encrypt_parser = subparsers.add_parser("encrypt", help="Encrypt messages under the lattice key")
    encrypt_parser.add_argument("--key", default="lattice.key", help="Lattice key file")
    encrypt_parser.add_argument("--mu", action="append", required=True, help="Message (LWE: integer; RLWE: comma-separated coefficients). Repeatable.")
    encrypt_parser.add_argument("--seeded", action="store_true", help="Write seed-compressed ciphertexts")
    encrypt_parser.add_argument("--out", default="ciphertexts.bin", help="Output path (default: ciphertexts.bin)")
    encrypt_parser.set_defaults(func=cmd_encrypt)

    # Process command
    process_parser = subparsers.add_parser("process", help="Evaluate a weighted sum over ciphertexts")
    process_parser.add_argument("--in", dest="input", default="ciphertexts.bin", help="Ciphertext file")
    process_parser.add_argument("--weights", required=True, help="'index:weight,...' or 'w0,w1,...'")
    process_parser.add_argument("--subtract", type=int, action="append", help="Input index to subtract from the sum. Repeatable.")
    process_parser.add_argument("--out", default="processed.bin", help="Output path (default: processed.bin)")
    process_parser.set_defaults(func=cmd_process)

    # Compress command
    compress_parser = subparsers.add_parser("compress", help="Compress ciphertexts into one additive ciphertext")
    compress_parser.add_argument("--esk", default="encrypted.key", help="Encrypted key file")
    compress_parser.add_argument("--in", dest="input", default="processed.bin", help="Ciphertext file")
    compress_parser.add_argument("--coeff", type=int, action="append", help="RLWE coefficient to extract. Repeatable (batched).")
    compress_parser.add_argument("--index", type=int, default=0, help="Which RLWE ciphertext in the file (default: 0)")
    compress_parser.add_argument("--out", default="compressed.bin", help="Output path (default: compressed.bin)")
    compress_parser.set_defaults(func=cmd_compress)

    # Decrypt command
    decrypt_parser = subparsers.add_parser("decrypt", help="Decrypt lattice or compressed ciphertexts")
    decrypt_parser.add_argument("--in", dest="input", required=True, help="Ciphertext or compressed file")
    decrypt_parser.add_argument("--key", help="Lattice key file (lattice ciphertexts)")
    decrypt_parser.add_argument("--ahe-key", help="Additive keypair file (compressed ciphertexts)")
    decrypt_parser.set_defaults(func=cmd_decrypt)

    # Bench command
    bench_parser = subparsers.add_parser("bench", help="Size report and timings for parameter sets")
    bench_parser.add_argument("--sets", default="table1", help="Bench group name or comma-separated labels (default: table1)")
    bench_parser.add_argument("--ahe-bits", type=int, help="Additive key size (default: from config)")
    bench_parser.add_argument("--trials", type=int, help="Timing trials per set (default: from config)")
    bench_parser.add_argument("--format", choices=["text", "machine"], default="text", help="Output format (default: text)")
    bench_parser.add_argument("--sizes-only", action="store_true", help="Skip key generation and timings")
    bench_parser.add_argument("--out", help="Write the report here instead of stdout")
    bench_parser.set_defaults(func=cmd_bench)

    # Serve command
    serve_parser = subparsers.add_parser("serve", help="Run the demo compression server")
    serve_parser.add_argument("--bind", help="host:port (default: from config)")
    serve_parser.set_defaults(func=cmd_serve)

    # Request command
    request_parser = subparsers.add_parser("request", help="Send one session to a demo server")
    request_parser.add_argument("--connect", help="host:port (default: from config)")
    request_parser.add_argument("--key", default="lattice.key", help="Lattice key file")
    request_parser.add_argument("--ahe-key", default="additive.key", help="Additive keypair file")
    request_parser.add_argument("--mu", action="append", required=True, help="Input message. Repeatable.")
    request_parser.add_argument("--weights", help="'index:weight,...' (default: all weights 1)")
    request_parser.add_argument("--coeff", type=int, action="append", help="RLWE coefficient to return. Repeatable.")
    request_parser.set_defaults(func=cmd_request)

    # Config command
    config_parser = subparsers.add_parser("config", help="Show current configuration")
    config_parser.set_defaults(func=cmd_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_ERROR

    _configure_logging(get_config().log_file)

    try:
        return args.func(args) or 0
    except IncompatibleParametersError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_SETUP
    except HeCompressError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
