# apps/reports/management/commands/pencil.py

import json

from django.core.management.base import BaseCommand, CommandError

from apps.reports.services import EXIT_OK, EXIT_UNVERIFIED, execute, render_text

PENCIL_COMMANDS = ("analyze", "wcf", "decompose")


def _vector(text):
    return [part.strip() for part in text.split(",") if part.strip()]


class Command(BaseCommand):
    help = "Analyze regular pencils sE - A and place eigenvalues with rank-one perturbations"

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest="subcommand", required=True)

        for name, text in (
            ("analyze", "Eigenvalue table, Segre characteristics, M(A) and a Weierstrass summary"),
            ("wcf", "Weierstrass canonical form: S, T, J, N and r"),
            ("decompose", "Structured factors of a rank-one pencil stored as E=F, A=G"),
        ):
            self._common(subparsers.add_parser(name, help=text)).add_argument("pencil", help="Pencil JSON file")

        place = self._common(subparsers.add_parser("place", help="Place a target multiset of size M(A)"))
        place.add_argument("pencil", help="Pencil JSON file")
        place.add_argument("--targets", required=True, help="value:multiplicity list, e.g. 1:1,-1:1,inf:2")

        restricted = self._common(
            subparsers.add_parser("place-restricted", help="Solve for w with u and v fixed")
        )
        restricted.add_argument("pencil", help="Pencil JSON file")
        restricted.add_argument("--u", type=_vector, default=None, help="Comma separated entries of u")
        restricted.add_argument("--v", type=_vector, default=None, help="Comma separated entries of v")
        restricted.add_argument("--targets", required=True)

        feedback = self._common(
            subparsers.add_parser(
                "feedback",
                help="State feedback u = f* x for E x' = A x + b u (real systems use the plain transpose)",
            )
        )
        feedback.add_argument("system", help="Pencil JSON file with input vector b")
        feedback.add_argument("--targets", required=True)

        inverse = self._common(subparsers.add_parser("inverse", help="Build A and P for two spectra"))
        inverse.add_argument("--before", required=True)
        inverse.add_argument("--after", required=True)

        bounds = self._common(subparsers.add_parser("verify-bounds", help="Check all perturbation bounds"))
        bounds.add_argument("pencil", help="Pencil JSON file")
        bounds.add_argument("rank_one", help="Rank-one JSON file (form, u, v, w or F, G)")

        trials = self._common(subparsers.add_parser("trials", help="Seeded Monte-Carlo acceptance runs"))
        trials.add_argument("kind", choices=["bounds", "place", "restricted", "feedback", "inverse"])
        trials.add_argument("--count", type=int, default=50)
        trials.add_argument("--size-min", type=int, default=2)
        trials.add_argument("--size-max", type=int, default=5)

    @staticmethod
    def _common(parser):
        parser.add_argument("--tol-rank", type=float, default=None, help="Rank decision tolerance")
        parser.add_argument("--tol-cluster", type=float, default=None, help="Eigenvalue clustering tolerance")
        parser.add_argument("--real", action="store_true", help="Real arithmetic for real data")
        parser.add_argument("--json", action="store_true", help="Print the machine-readable report")
        parser.add_argument("--seed", type=int, default=None, help="Seed for randomized verification")
        return parser

    def handle(self, *args, **options):
        command = options["subcommand"]
        data = self._request(command, options)
        code, report = execute(command, data)

        if options["json"]:
            self.stdout.write(json.dumps(report, indent=2))
        else:
            self.stdout.write(render_text(report))

        if code == EXIT_OK:
            self.stdout.write(self.style.SUCCESS(f"{command}: verified"))
            return
        if code == EXIT_UNVERIFIED:
            self.stdout.write(self.style.WARNING(f"{command}: constructed but not verified"))
        detail = report["error"]["detail"] if report["error"] else "see report"
        raise CommandError(f"{command} failed: {detail}", returncode=code)

    def _request(self, command, options):
        data = {
            key: options[key]
            for key in ("tol_rank", "tol_cluster", "seed")
            if options.get(key) is not None
        }
        if options["real"]:
            data["real"] = True

        if command in PENCIL_COMMANDS or command == "place":
            data.update(self._load(options["pencil"]))
        elif command == "place-restricted":
            data.update(self._load(options["pencil"]))
            data.update({key: options[key] for key in ("u", "v") if options[key] is not None})
        elif command == "feedback":
            data.update(self._load(options["system"]))
        elif command == "inverse":
            data.update(before=options["before"], after=options["after"])
        elif command == "verify-bounds":
            data.update(pencil=self._load(options["pencil"]), rank_one=self._load(options["rank_one"]))
        elif command == "trials":
            data.update(
                kind=options["kind"],
                count=options["count"],
                size_min=options["size_min"],
                size_max=options["size_max"],
            )
        if "targets" in options:
            data["targets"] = options["targets"]
        return data

    @staticmethod
    def _load(path):
        try:
            with open(path, encoding="utf-8") as handle:
                content = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise CommandError(f"Cannot read {path}: {exc}", returncode=1) from exc
        if not isinstance(content, dict):
            raise CommandError(f"{path} does not hold a JSON object.", returncode=1)
        return content
