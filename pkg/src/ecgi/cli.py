"""Command-line interface: ``ecgi <group> <command> [options]``.

Every command prints its response DTO as JSON on stdout. Failures print the
message on stderr and exit with status 1.
"""

import argparse
import logging
import sys
from typing import Callable, List, Optional, Tuple

from pydantic import BaseModel

from .application import (
    ApplicationException,
    BaselineApplicationService,
    CorpusApplicationService,
    ExperimentApplicationService,
    GeometryApplicationService,
    InversionApplicationService,
    SimulationApplicationService,
    TrainingApplicationService,
)
from .application.dtos import (
    CorpusSpecFile,
    EMConfigFile,
    ExperimentConfig,
    FixedEPConfigFile,
    GreensiteConfigFile,
    VAEConfigFile,
)
from .application.services import read_config
from .infrastructure import (
    ContainerArtifactRepository,
    Database,
    FileCorpusRepository,
    SQLMetricsRepository,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)8s: %(name)s: %(message)s"


def _dims(text: str) -> Tuple[int, int, int]:
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be three integers, got {text!r}")
    if len(dims) != 3:
        raise argparse.ArgumentTypeError(f"dims must be three integers, got {text!r}")
    return dims


def _methods(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _geometry_build(args, artifacts):
    service = GeometryApplicationService(artifacts)
    return service.build(args.dims, args.leads, args.out, args.spacing, args.min_dist)


def _sim_run(args, artifacts):
    service = SimulationApplicationService(artifacts)
    return service.run(args.mesh, args.origin, args.out, args.scar_center, args.scar_radius)


def _corpus_generate(args, artifacts):
    service = CorpusApplicationService(artifacts, FileCorpusRepository(artifacts))
    return service.generate(args.mesh, read_config(CorpusSpecFile, args.spec), args.out, args.n_jobs)


def _corpus_cases(args, artifacts):
    service = CorpusApplicationService(artifacts, FileCorpusRepository(artifacts))
    return service.make_cases(
        args.mesh,
        args.corpus,
        args.setting,
        args.out,
        snr_db=args.snr_db,
        n_origins=args.n_origins,
        n_scars=args.n_scars,
        scar_radius=args.scar_radius,
        seed=args.seed,
        n_jobs=args.n_jobs,
    )


def _vae_train(args, artifacts):
    service = TrainingApplicationService(artifacts, FileCorpusRepository(artifacts))
    return service.train(args.corpus, read_config(VAEConfigFile, args.config), args.out, args.plot)


def _vae_prior(args, artifacts):
    service = TrainingApplicationService(artifacts, FileCorpusRepository(artifacts))
    return service.estimate_prior(args.weights, args.corpus, args.out)


def _vae_sample(args, artifacts):
    service = TrainingApplicationService(artifacts, FileCorpusRepository(artifacts))
    return service.sample(args.weights, args.n, args.prior, args.seed, args.plot, args.columns)


def _infer_run(args, artifacts):
    request = read_config(EMConfigFile, args.config)
    if args.beta is not None:
        request = request.model_copy(update={"beta": args.beta})
    service = InversionApplicationService(artifacts)
    return service.infer(args.ecg, args.weights, args.zprior, args.H, args.out, request)


def _baseline_greensite(args, artifacts):
    service = BaselineApplicationService(artifacts)
    return service.greensite(args.ecg, args.H, args.out, read_config(GreensiteConfigFile, args.config))


def _baseline_fixed_ep(args, artifacts):
    service = BaselineApplicationService(artifacts)
    return service.fixed_ep(args.ecg, args.mesh, args.out, read_config(FixedEPConfigFile, args.config))


def _eval_run(args, artifacts):
    config = read_config(ExperimentConfig, args.config)
    overrides = {
        name: getattr(args, name)
        for name in ("bundle", "weights", "zprior", "n_jobs")
        if getattr(args, name) is not None
    }
    if args.no_plots:
        overrides["plots"] = False
    config = config.model_copy(update=overrides)
    corpus = CorpusApplicationService(artifacts, FileCorpusRepository(artifacts))

    if args.database is None:
        service = ExperimentApplicationService(artifacts, corpus_service=corpus)
        return service.run_from_directory(args.setting, args.methods, args.cases, args.out, config)

    database = Database(args.database)
    database.create_tables()
    with database.get_session() as session:
        service = ExperimentApplicationService(artifacts, SQLMetricsRepository(session), corpus)
        return service.run_from_directory(args.setting, args.methods, args.cases, args.out, config)


def _serve(args, artifacts):
    import uvicorn

    uvicorn.run("ecgi.api.main:app", host=args.host, port=args.port, log_level=args.log_level.lower())
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecgi", description="ECG imaging laboratory")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    groups = parser.add_subparsers(dest="group", required=True)

    geometry = groups.add_parser("geometry", help="meshes and lead fields").add_subparsers(
        dest="command", required=True
    )
    p = geometry.add_parser("build", help="build a lattice heart and its lead field")
    p.add_argument("--dims", type=_dims, default=(8, 8, 4))
    p.add_argument("--leads", type=int, default=32)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--min-dist", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_geometry_build)

    sim = groups.add_parser("sim", help="electrophysiology simulation").add_subparsers(
        dest="command", required=True
    )
    p = sim.add_parser("run", help="simulate one paced sequence")
    p.add_argument("--mesh", required=True)
    p.add_argument("--origin", type=int, required=True)
    p.add_argument("--scar-center", type=int)
    p.add_argument("--scar-radius", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_sim_run)

    corpus = groups.add_parser("corpus", help="training corpora and test cases").add_subparsers(
        dest="command", required=True
    )
    p = corpus.add_parser("generate", help="simulate a training corpus")
    p.add_argument("--mesh", required=True)
    p.add_argument("--spec")
    p.add_argument("--out", required=True)
    p.add_argument("--n-jobs", type=int, default=1)
    p.set_defaults(handler=_corpus_generate)
    p = corpus.add_parser("cases", help="simulate held-out test cases")
    p.add_argument("--mesh", required=True, help="geometry bundle with H")
    p.add_argument("--corpus", required=True, help="training corpus directory")
    p.add_argument("--setting", required=True)
    p.add_argument("--snr-db", type=float, default=20.0)
    p.add_argument("--n-origins", type=int, default=5)
    p.add_argument("--n-scars", type=int, default=2)
    p.add_argument("--scar-radius", type=float)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n-jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_corpus_cases)

    vae = groups.add_parser("vae", help="sequential VAE").add_subparsers(dest="command", required=True)
    p = vae.add_parser("train", help="train on a corpus directory")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    p.set_defaults(handler=_vae_train)
    p = vae.add_parser("prior", help="estimate the Z prior")
    p.add_argument("--weights", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_vae_prior)
    p = vae.add_parser("sample", help="decode samples from the Z prior or from N(0, I)")
    p.add_argument("--weights", required=True)
    p.add_argument("--prior")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--columns", type=int)
    p.add_argument("--plot")
    p.set_defaults(handler=_vae_sample)

    infer = groups.add_parser("infer", help="EM inversion").add_subparsers(dest="command", required=True)
    p = infer.add_parser("run", help="reconstruct TMP from an ECG container")
    p.add_argument("--ecg", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--zprior", required=True)
    p.add_argument("--H", required=True, help="lead-field container or geometry bundle")
    p.add_argument("--config")
    p.add_argument("--beta", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_infer_run)

    baseline = groups.add_parser("baseline", help="reference reconstructions").add_subparsers(
        dest="command", required=True
    )
    p = baseline.add_parser("greensite", help="temporal-SVD Tikhonov")
    p.add_argument("--ecg", required=True)
    p.add_argument("--H", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_baseline_greensite)
    p = baseline.add_parser("fixed-ep", help="fixed physiological prior")
    p.add_argument("--ecg", required=True)
    p.add_argument("--mesh", required=True, help="geometry bundle with H")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_baseline_fixed_ep)

    evaluation = groups.add_parser("eval", help="experiment harness").add_subparsers(
        dest="command", required=True
    )
    p = evaluation.add_parser("run", help="run methods on a case directory")
    p.add_argument("--setting", required=True)
    p.add_argument("--methods", type=_methods, default=["proposed", "greensite", "fixed-ep"])
    p.add_argument("--cases", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--bundle")
    p.add_argument("--weights")
    p.add_argument("--zprior")
    p.add_argument("--n-jobs", type=int)
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--database", help="SQLAlchemy URL to also store the records in")
    p.set_defaults(handler=_eval_run)

    p = groups.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_serve)
    return parser


Handler = Callable[[argparse.Namespace, ContainerArtifactRepository], Optional[BaseModel]]


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format=LOG_FORMAT, level=getattr(logging, args.log_level))

    handler: Handler = args.handler
    try:
        response = handler(args, ContainerArtifactRepository())
    except ApplicationException as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if response is not None:
        print(response.model_dump_json(indent=2, by_alias=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
